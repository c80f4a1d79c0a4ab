#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "edgartext/audit.hpp"
#include "edgartext/stats.hpp"

using namespace edgartext;

namespace {

namespace fs = std::filesystem;

DatasetRecord make_record(std::string accession, std::string text, int sequence = 1) {
    DatasetRecord r;
    r.accession_number = std::move(accession);
    r.cik = 1;
    r.company_name = "Test Co";
    r.form_type = "10-K";
    r.acceptance = DateTime{{2010, 6, 1}, 12, 0, 0};
    r.document_sequence = sequence;
    r.document_type = "10-K";
    r.filename = "doc.txt";
    r.text = std::move(text);
    return r;
}

DescriptorLexicon small_lexicon() {
    return parse_lexicon(
        "descriptor,axis,canonical\n"
        "American,nationality,\n"
        "Chinese,nationality,\n"
        "Mexican,nationality,\n"
        "Latin,race-ethnicity,\n"
        "Asian,race-ethnicity,\n"
        "Latin American,race-ethnicity,\n"
        "white,race-ethnicity,\n"
        "Christian,religion,\n"
        "gay,sexual-orientation,\n"
        "female,gender-sex,\n");
}

DescriptorHit make_hit(std::string descriptor, std::string sentence) {
    DescriptorHit hit;
    hit.sentence = std::move(sentence);
    hit.descriptor = std::move(descriptor);
    return hit;
}

}  // namespace

TEST_CASE("sentence splitting finds boundaries after terminal punctuation") {
    const auto two = split_sentences("The company grew. Revenue increased.");
    REQUIRE(two.size() == 2);
    CHECK(two[0] == "The company grew.");
    CHECK(two[1] == "Revenue increased.");

    CHECK(split_sentences("Will demand recover? Management believes so.").size() == 2);
    CHECK(split_sentences("Results were strong! Margins expanded.").size() == 2);
    CHECK(split_sentences("").empty());
    CHECK(split_sentences("   \n  \n").empty());
}

TEST_CASE("sentence splitting respects abbreviations and decimals") {
    CHECK(split_sentences("Apple Inc. grew fast.").size() == 1);
    CHECK(split_sentences("The U.S. Securities and Exchange Commission reviewed.").size() == 1);
    CHECK(split_sentences("Revenue was 3.5 million last year.").size() == 1);
    CHECK(split_sentences("See note 3. above for details.").size() == 1);
    // A regulator's acronym before a genuine boundary still splits.
    CHECK(split_sentences("We filed with the SEC. The Company responded.").size() == 2);
    // Dr. + name stays joined.
    CHECK(split_sentences("Dr. Smith joined the board.").size() == 1);
}

TEST_CASE("sentence splitting treats lines as hard boundaries") {
    const auto items = split_sentences("- revenue growth\n- cost control\n");
    REQUIRE(items.size() == 2);
    CHECK(items[0] == "- revenue growth");
    CHECK(items[1] == "- cost control");

    const auto heading = split_sentences("Item 1. Business\nRisk factors follow.");
    REQUIRE(heading.size() == 3);
    CHECK(heading[0] == "Item 1.");
    CHECK(heading[1] == "Business");
    CHECK(heading[2] == "Risk factors follow.");
}

TEST_CASE("sentence splitting absorbs closing quotes") {
    const auto quoted = split_sentences("He said \"stop.\" Then he left.");
    REQUIRE(quoted.size() == 2);
    CHECK(quoted[0] == "He said \"stop.\"");
    CHECK(quoted[1] == "Then he left.");
}

TEST_CASE("lexicon parsing resolves variants and drops excluded terms") {
    const auto lexicon = parse_lexicon(
        "descriptor,axis,canonical\n"
        "gender neutral,gender-sex,\n"
        "gender-neutral,gender-sex,gender neutral\n"
        "white,race-ethnicity,\n"
        "pansexual,sexual-orientation,\n"
        "pan,sexual-orientation,pansexual\n");
    // "white" and "pan" are dropped by the default exclusion list.
    std::set<std::string> surfaces;
    for (const auto& entry : lexicon.entries) surfaces.insert(entry.surface);
    CHECK(surfaces ==
          std::set<std::string>{"gender neutral", "gender-neutral", "pansexual"});

    // A variant match reports its canonical form.
    const auto matches = find_descriptor_matches("A gender-neutral policy", lexicon);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].entry->canonical == "gender neutral");
    CHECK(matches[0].entry->axis == DescriptorAxis::kGenderSex);

    // Excluded terms can never match.
    CHECK(find_descriptor_matches("The white paper and a pan", lexicon).empty());
}

TEST_CASE("lexicon parsing reports malformed rows with line numbers") {
    CHECK_THROWS_WITH_AS(parse_lexicon("descriptor,axis,canonical\nfoo,bogus-axis,\n"),
                         doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_lexicon("descriptor,axis,canonical\nonly-two-fields,religion\n"),
                         doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_lexicon("wrong,header,row,here\n"), doctest::Contains("line 1"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_lexicon("descriptor,axis,canonical\nfoo,religion,missing target\n"),
        doctest::Contains("not an entry"), std::runtime_error);
    // A variant may not point across axes.
    CHECK_THROWS_WITH_AS(parse_lexicon("descriptor,axis,canonical\n"
                                       "American,nationality,\n"
                                       "Yankee,race-ethnicity,American\n"),
                         doctest::Contains("axis"), std::runtime_error);
}

TEST_CASE("empty lexicon input yields an empty lexicon without error") {
    CHECK(parse_lexicon("").entries.empty());
    CHECK(parse_lexicon("  \n \n").entries.empty());
}

TEST_CASE("shipped descriptor lexicon loads and honors exclusions") {
    const auto lexicon = load_lexicon(fs::path(EDGARTEXT_DATA_DIR) / "descriptors.csv");
    CHECK(lexicon.entries.size() > 50);

    std::set<std::string> surfaces;
    bool american_case_sensitive = false;
    bool gay_case_sensitive = true;
    for (const auto& entry : lexicon.entries) {
        surfaces.insert(entry.surface);
        if (entry.surface == "American") american_case_sensitive = entry.case_sensitive;
        if (entry.surface == "gay") gay_case_sensitive = entry.case_sensitive;
    }
    for (const char* excluded : {"straight", "white", "Black", "bi", "pan", "ace", "poly"}) {
        CHECK(surfaces.count(excluded) == 0);
    }
    CHECK(surfaces.count("American") == 1);
    CHECK(surfaces.count("Latin American") == 1);
    CHECK(surfaces.count("heterosexual") == 1);
    CHECK(surfaces.count("Arab") == 1);
    CHECK(american_case_sensitive);
    CHECK_FALSE(gay_case_sensitive);
}

TEST_CASE("descriptor matching is word-bounded and case-aware") {
    const auto lexicon = small_lexicon();

    // Uppercase surfaces match exactly; lowercase surfaces ignore case.
    CHECK(find_descriptor_matches("american values", lexicon).empty());
    CHECK(find_descriptor_matches("American values", lexicon).size() == 1);
    CHECK(find_descriptor_matches("GAY and proud", lexicon).size() == 1);

    // Word boundaries: embedded occurrences do not match.
    CHECK(find_descriptor_matches("Asiana Airlines", lexicon).empty());
    CHECK(find_descriptor_matches("Pan-Asian cuisine", lexicon).size() == 1);

    // Hyphens separate words, so both halves match.
    const auto hyphen = find_descriptor_matches("un-American activity", lexicon);
    REQUIRE(hyphen.size() == 1);
    CHECK(hyphen[0].position == 3);

    // Overlapping entries all report, ordered by position then length.
    const auto overlap = find_descriptor_matches("Latin American markets", lexicon);
    REQUIRE(overlap.size() == 3);
    CHECK(overlap[0].entry->canonical == "Latin");
    CHECK(overlap[0].position == 0);
    CHECK(overlap[1].entry->canonical == "Latin American");
    CHECK(overlap[1].position == 0);
    CHECK(overlap[2].entry->canonical == "American");
    CHECK(overlap[2].position == 6);
}

TEST_CASE("sentence descriptor assignment prefers the longest canonical form") {
    const auto lexicon = small_lexicon();

    const auto latin = assign_descriptor("Latin American markets grew.", lexicon);
    REQUIRE(latin.has_value());
    CHECK(latin->descriptor == "Latin American");
    CHECK(latin->axis == DescriptorAxis::kRaceEthnicity);
    CHECK(latin->span_begin == 0);
    CHECK(latin->span_length == 14);

    const auto christian = assign_descriptor("Asian and Christian communities.", lexicon);
    REQUIRE(christian.has_value());
    CHECK(christian->descriptor == "Christian");

    // Equal-length canonicals fall back to the leftmost occurrence.
    const auto tie = assign_descriptor("Chinese and Mexican suppliers.", lexicon);
    REQUIRE(tie.has_value());
    CHECK(tie->descriptor == "Chinese");

    CHECK_FALSE(assign_descriptor("The white paper describes controls.", lexicon).has_value());
    CHECK_FALSE(assign_descriptor("Nothing relevant here.", lexicon).has_value());
}

TEST_CASE("descriptor prevalence uses filing-level conditional denominators") {
    const auto lexicon = small_lexicon();
    std::vector<DatasetRecord> records;
    records.push_back(make_record("a-1", "Our American subsidiary performed well."));
    records.push_back(make_record("a-2", "The company grew revenue."));
    records.push_back(make_record(
        "a-3", "American and Chinese operations expanded. Christian holidays affected sales."));
    records.push_back(make_record("a-4", "No relevant content here."));

    const auto prevalence = descriptor_prevalence(records, lexicon);
    REQUIRE(prevalence.size() == 5);  // every axis is always present

    const AxisStats& nationality = prevalence.at(DescriptorAxis::kNationality);
    CHECK(nationality.filings_with_axis == 2);
    CHECK(nationality.axis_prevalence == doctest::Approx(0.5));
    REQUIRE(nationality.descriptors.count("American") == 1);
    const DescriptorStats& american = nationality.descriptors.at("American");
    CHECK(american.filing_count == 2);
    CHECK(american.filing_prevalence == doctest::Approx(1.0));
    CHECK(american.mention_count == 2);
    const DescriptorStats& chinese = nationality.descriptors.at("Chinese");
    CHECK(chinese.filing_count == 1);
    CHECK(chinese.filing_prevalence == doctest::Approx(0.5));

    const AxisStats& religion = prevalence.at(DescriptorAxis::kReligion);
    CHECK(religion.filings_with_axis == 1);
    CHECK(religion.axis_prevalence == doctest::Approx(0.25));
    CHECK(religion.descriptors.at("Christian").filing_prevalence == doctest::Approx(1.0));

    CHECK(prevalence.at(DescriptorAxis::kGenderSex).filings_with_axis == 0);
    CHECK(prevalence.at(DescriptorAxis::kGenderSex).axis_prevalence == 0.0);
    CHECK(prevalence.at(DescriptorAxis::kGenderSex).descriptors.empty());
}

TEST_CASE("descriptor prevalence groups attachments under their filing") {
    const auto lexicon = small_lexicon();
    std::vector<DatasetRecord> records;
    records.push_back(make_record("a-1", "American operations.", 1));
    records.push_back(make_record("a-1", "Chinese partners joined.", 2));
    records.push_back(make_record("a-2", "Nothing here."));

    const auto prevalence = descriptor_prevalence(records, lexicon);
    const AxisStats& nationality = prevalence.at(DescriptorAxis::kNationality);
    CHECK(nationality.filings_with_axis == 1);  // both matches belong to filing a-1
    CHECK(nationality.axis_prevalence == doctest::Approx(0.5));
    CHECK(nationality.descriptors.at("American").filing_count == 1);
    CHECK(nationality.descriptors.at("Chinese").filing_count == 1);
}

TEST_CASE("empty corpus prevalence is all zeros") {
    const auto prevalence = descriptor_prevalence({}, small_lexicon());
    REQUIRE(prevalence.size() == 5);
    for (const auto& [axis, stats] : prevalence) {
        CHECK(stats.filings_with_axis == 0);
        CHECK(stats.axis_prevalence == 0.0);
        CHECK(stats.descriptors.empty());
    }
}

TEST_CASE("pronoun prevalence uses conditional denominators") {
    std::vector<DatasetRecord> records;
    records.push_back(make_record("f-1", "She went to the office."));
    records.push_back(make_record("f-2", "His report was filed."));
    records.push_back(make_record("f-3", "The firm expanded."));

    const PronounReport report = pronoun_prevalence(records);
    CHECK(report.total_filings == 3);
    CHECK(report.filings_with_gender == 2);
    CHECK(report.gender_pct == doctest::Approx(200.0 / 3.0));
    CHECK(report.she_pct == doctest::Approx(50.0));
    CHECK(report.he_pct == doctest::Approx(50.0));
    CHECK(report.unknown_pct == doctest::Approx(0.0));
    CHECK(report.filings_with_grammatical == 2);
    CHECK(report.grammatical_pct == doctest::Approx(200.0 / 3.0));
    CHECK(report.first_person_pct == doctest::Approx(0.0));
    CHECK(report.second_person_pct == doctest::Approx(0.0));
    CHECK(report.third_person_pct == doctest::Approx(100.0));
}

TEST_CASE("pronoun matching is word-bounded and case-insensitive") {
    // "shell" must not count as "she", "this" must not count as "his".
    std::vector<DatasetRecord> no_hits;
    no_hits.push_back(make_record("f-1", "The shell company handled this filing."));
    const PronounReport none = pronoun_prevalence(no_hits);
    CHECK(none.filings_with_gender == 0);
    CHECK(none.gender_pct == 0.0);

    std::vector<DatasetRecord> upper;
    upper.push_back(make_record("f-1", "SHE APPROVED IT."));
    const PronounReport loud = pronoun_prevalence(upper);
    CHECK(loud.filings_with_gender == 1);
    CHECK(loud.she_pct == doctest::Approx(100.0));
    CHECK(loud.third_person_pct == doctest::Approx(100.0));  // "IT" counts too

    CHECK(pronoun_prevalence({}).total_filings == 0);
    CHECK(pronoun_prevalence({}).gender_pct == 0.0);
}

TEST_CASE("pronoun category sets match the published convention") {
    CHECK(pronoun_set_she() == std::vector<std::string>{"she", "her", "hers", "herself"});
    CHECK(pronoun_set_he() == std::vector<std::string>{"he", "him", "his", "himself"});
    CHECK(pronoun_set_unknown().size() == 7);
    CHECK(pronoun_set_first_person().size() == 10);
    CHECK(pronoun_set_second_person().size() == 5);
    // Third person embeds the three gender sets plus "it" forms.
    const auto& third = pronoun_set_third_person();
    CHECK(third.size() == 18);
    for (const auto& word : pronoun_set_she()) {
        CHECK(std::find(third.begin(), third.end(), word) != third.end());
    }
    for (const auto& word : pronoun_set_unknown()) {
        CHECK(std::find(third.begin(), third.end(), word) != third.end());
    }
}

TEST_CASE("frequency-matched sampling matches reference counts") {
    std::vector<DescriptorHit> hits;
    for (int i = 0; i < 10; ++i) {
        hits.push_back(make_hit("American", "sentence " + std::to_string(i)));
    }
    const std::map<std::string, std::size_t> reference{{"American", 3}};

    const SampleResult first = frequency_matched_sample(reference, hits, 42);
    CHECK(first.sampled.size() == 3);
    CHECK(first.shortfalls.empty());

    // Deterministic for a fixed seed.
    const SampleResult second = frequency_matched_sample(reference, hits, 42);
    REQUIRE(second.sampled.size() == first.sampled.size());
    for (std::size_t i = 0; i < first.sampled.size(); ++i) {
        CHECK(first.sampled[i].sentence == second.sampled[i].sentence);
    }

    // Sampled hits keep their original relative order.
    for (std::size_t i = 1; i < first.sampled.size(); ++i) {
        CHECK(first.sampled[i - 1].sentence < first.sampled[i].sentence);
    }
}

TEST_CASE("frequency-matched sampling reports shortfalls") {
    std::vector<DescriptorHit> hits;
    hits.push_back(make_hit("American", "s1"));
    hits.push_back(make_hit("American", "s2"));

    const SampleResult scarce =
        frequency_matched_sample({{"American", 5}}, hits, 7);
    CHECK(scarce.sampled.size() == 2);  // everything available is taken
    REQUIRE(scarce.shortfalls.count("American") == 1);
    CHECK(scarce.shortfalls.at("American") == 3);

    const SampleResult missing = frequency_matched_sample({{"Chinese", 2}}, hits, 7);
    CHECK(missing.sampled.empty());
    CHECK(missing.shortfalls.at("Chinese") == 2);

    const SampleResult zero = frequency_matched_sample({{"American", 0}}, hits, 7);
    CHECK(zero.sampled.empty());
    CHECK(zero.shortfalls.empty());
}

TEST_CASE("stub scorer is deterministic and in range") {
    StubToxicityScorer scorer;
    const double first = scorer.score("The white paper describes controls.");
    const double again = scorer.score("The white paper describes controls.");
    CHECK(first == again);
    CHECK(first >= 0.0);
    CHECK(first <= 1.0);
    CHECK(scorer.score("a") != scorer.score("b"));
}

TEST_CASE("sentence scoring preserves order and counts failures") {
    std::vector<DescriptorHit> hits;
    for (int i = 0; i < 10; ++i) {
        hits.push_back(make_hit("American", "sentence " + std::to_string(i)));
    }

    StubToxicityScorer stub;
    const ScoreResult scored = score_sentences(hits, stub);
    REQUIRE(scored.hits.size() == 10);
    CHECK(scored.unscored == 0);
    for (std::size_t i = 0; i < scored.hits.size(); ++i) {
        CHECK(scored.hits[i].hit.sentence == hits[i].sentence);
        REQUIRE(scored.hits[i].score.has_value());
        CHECK(*scored.hits[i].score == stub.score(hits[i].sentence));
    }

    // A scorer that always fails leaves every hit unscored but keeps it.
    FunctionToxicityScorer broken([](const std::string&) -> double {
        throw std::runtime_error("offline");
    });
    const ScoreResult failed = score_sentences(hits, broken);
    CHECK(failed.hits.size() == 10);
    CHECK(failed.unscored == 10);
    for (const auto& h : failed.hits) CHECK_FALSE(h.score.has_value());

    CHECK(score_sentences({}, stub).hits.empty());
}

TEST_CASE("sentence scoring retries before giving up") {
    std::vector<DescriptorHit> one;
    one.push_back(make_hit("American", "only sentence"));
    ScoreOptions serial;
    serial.max_in_flight = 1;

    // Fails twice, then succeeds: within the default budget of 3 attempts.
    std::atomic<int> calls{0};
    FunctionToxicityScorer flaky([&calls](const std::string&) -> double {
        if (++calls <= 2) throw std::runtime_error("transient");
        return 0.25;
    });
    const ScoreResult recovered = score_sentences(one, flaky, serial);
    CHECK(recovered.unscored == 0);
    REQUIRE(recovered.hits[0].score.has_value());
    CHECK(*recovered.hits[0].score == 0.25);
    CHECK(calls.load() == 3);

    // Fails three times: exhausts max_retries = 2 and stays unscored.
    std::atomic<int> stubborn_calls{0};
    FunctionToxicityScorer stubborn([&stubborn_calls](const std::string&) -> double {
        if (++stubborn_calls <= 3) throw std::runtime_error("transient");
        return 0.25;
    });
    const ScoreResult gave_up = score_sentences(one, stubborn, serial);
    CHECK(gave_up.unscored == 1);
    CHECK_FALSE(gave_up.hits[0].score.has_value());
    CHECK(stubborn_calls.load() == 3);

    // Out-of-range results are failures, not scores.
    FunctionToxicityScorer out_of_range([](const std::string&) { return 1.5; });
    const ScoreResult rejected = score_sentences(one, out_of_range, serial);
    CHECK(rejected.unscored == 1);
}

TEST_CASE("http scorer parses transport responses") {
    std::string seen_url;
    std::string seen_body;
    HttpToxicityScorer scorer(
        "https://scorer.example/v1/score", "key123",
        [&](const std::string& url, const std::string& body) -> HttpToxicityScorer::Response {
            seen_url = url;
            seen_body = body;
            return {200, "{\"score\":0.42}"};
        });
    CHECK(scorer.score("Some sentence.") == doctest::Approx(0.42));
    CHECK(seen_url == "https://scorer.example/v1/score");
    CHECK(seen_body.find("\"text\"") != std::string::npos);
    CHECK(seen_body.find("Some sentence.") != std::string::npos);

    HttpToxicityScorer failing(
        "https://scorer.example/v1/score", "",
        [](const std::string&, const std::string&) -> HttpToxicityScorer::Response {
            return {500, "server error"};
        });
    CHECK_THROWS_AS(failing.score("x"), std::runtime_error);

    HttpToxicityScorer garbled(
        "https://scorer.example/v1/score", "",
        [](const std::string&, const std::string&) -> HttpToxicityScorer::Response {
            return {200, "not json"};
        });
    CHECK_THROWS_AS(garbled.score("x"), std::runtime_error);

    HttpToxicityScorer out_of_range(
        "https://scorer.example/v1/score", "",
        [](const std::string&, const std::string&) -> HttpToxicityScorer::Response {
            return {200, "{\"score\":1.5}"};
        });
    CHECK_THROWS_AS(out_of_range.score("x"), std::runtime_error);
}

TEST_CASE("scorer configuration comes from the environment") {
    unsetenv("EDGARTEXT_SCORER_URL");
    unsetenv("EDGARTEXT_SCORER_KEY");
    CHECK_FALSE(scorer_config_from_env().has_value());

    setenv("EDGARTEXT_SCORER_URL", "https://scorer.example/v1", 1);
    auto config = scorer_config_from_env();
    REQUIRE(config.has_value());
    CHECK(config->url == "https://scorer.example/v1");
    CHECK(config->api_key.empty());

    setenv("EDGARTEXT_SCORER_KEY", "secret", 1);
    config = scorer_config_from_env();
    REQUIRE(config.has_value());
    CHECK(config->api_key == "secret");

    unsetenv("EDGARTEXT_SCORER_URL");
    unsetenv("EDGARTEXT_SCORER_KEY");
}

TEST_CASE("welch test matches an independent statistical oracle") {
    const std::vector<double> a = {0.012, 0.009, 0.015, 0.007, 0.011,
                                   0.013, 0.008, 0.010, 0.014, 0.006};
    const std::vector<double> b = {0.031, 0.042, 0.037, 0.029, 0.045, 0.033,
                                   0.039, 0.041, 0.028, 0.036, 0.044, 0.030};
    const WelchResult r = welch_t_test(a, b);
    // Frozen from an independent implementation of Welch's unequal-variance
    // t-test over the same fixed samples.
    CHECK(r.t == doctest::Approx(-12.983026584624373).epsilon(1e-12));
    CHECK(r.df == doctest::Approx(16.803774578796055).epsilon(1e-12));
    CHECK(std::abs(r.p_value - 3.4769580946485436e-10) < 1e-9);
    CHECK(r.p_value == doctest::Approx(3.4769580946485436e-10).epsilon(1e-6));
    CHECK(r.mean_a == doctest::Approx(0.0105));
    CHECK(r.mean_b == doctest::Approx(0.03625));

    const std::vector<double> c = {0.020, 0.025, 0.022, 0.027, 0.024, 0.021};
    const std::vector<double> d = {0.023, 0.026, 0.019, 0.028, 0.022, 0.025, 0.024};
    const WelchResult r2 = welch_t_test(c, d);
    CHECK(std::abs(r2.p_value - 0.6626640147619314) < 1e-9);

    CHECK_THROWS_AS(welch_t_test({0.1}, {0.2, 0.3}), std::invalid_argument);
    CHECK_THROWS_AS(welch_t_test({0.1, 0.2}, {0.3}), std::invalid_argument);

    // Degenerate zero-variance cases.
    CHECK(welch_t_test({0.5, 0.5}, {0.5, 0.5}).p_value == doctest::Approx(1.0));
    CHECK(welch_t_test({0.5, 0.5}, {0.6, 0.6}).p_value == doctest::Approx(0.0));
}

TEST_CASE("incomplete beta obeys closed forms and symmetry") {
    CHECK(regularized_incomplete_beta(1.0, 1.0, 0.35) == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(4.0, 4.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(2.0, 5.0, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2.0, 5.0, 1.0) == 1.0);
    for (double x : {0.1, 0.3, 0.7}) {
        const double direct = regularized_incomplete_beta(2.5, 3.5, x);
        const double mirrored = 1.0 - regularized_incomplete_beta(3.5, 2.5, 1.0 - x);
        CHECK(direct == doctest::Approx(mirrored).epsilon(1e-12));
    }
}

TEST_CASE("toxicity reduction reports signed percentages and p-values") {
    std::map<std::string, std::vector<double>> ours;
    std::map<std::string, std::vector<double>> comparison;
    ours["American"] = {0.01, 0.01};
    comparison["American"] = {0.04, 0.04};
    ours["Chinese"] = {0.012, 0.009, 0.015, 0.007, 0.011, 0.013, 0.008, 0.010, 0.014, 0.006};
    comparison["Chinese"] = {0.031, 0.042, 0.037, 0.029, 0.045, 0.033,
                             0.039, 0.041, 0.028, 0.036, 0.044, 0.030};
    ours["Korean"] = {0.020, 0.025, 0.022, 0.027, 0.024, 0.021};
    comparison["Korean"] = {0.023, 0.026, 0.019, 0.028, 0.022, 0.025, 0.024};

    const ReductionReport report = toxicity_reduction(ours, comparison);
    REQUIRE(report.entries.size() == 3);
    CHECK(report.skipped.empty());

    const ReductionEntry& american = report.entries[0];
    CHECK(american.descriptor == "American");
    CHECK(american.reduction_pct == doctest::Approx(-75.0));
    CHECK(american.n_a == 2);
    CHECK(american.n_b == 2);

    const ReductionEntry& chinese = report.entries[1];
    CHECK(chinese.descriptor == "Chinese");
    CHECK(chinese.reduction_pct == doctest::Approx(-71.03448275862068));
    CHECK(std::abs(chinese.p_value - 3.4769580946485436e-10) < 1e-9);

    const ReductionEntry& korean = report.entries[2];
    CHECK(std::abs(korean.p_value - 0.6626640147619314) < 1e-9);
}

TEST_CASE("toxicity reduction on identical samples is a null result") {
    std::map<std::string, std::vector<double>> same;
    same["American"] = {0.02, 0.03, 0.025};
    const ReductionReport report = toxicity_reduction(same, same);
    REQUIRE(report.entries.size() == 1);
    CHECK(report.entries[0].reduction_pct == doctest::Approx(0.0));
    CHECK(report.entries[0].p_value == doctest::Approx(1.0));
}

TEST_CASE("toxicity reduction skips descriptors with reasons") {
    std::map<std::string, std::vector<double>> ours;
    std::map<std::string, std::vector<double>> comparison;
    ours["only-here"] = {0.1, 0.2};
    ours["tiny"] = {0.1, 0.2};
    comparison["tiny"] = {0.3};
    ours["zero-base"] = {0.1, 0.2};
    comparison["zero-base"] = {0.0, 0.0};

    const ReductionReport report = toxicity_reduction(ours, comparison);
    CHECK(report.entries.empty());
    REQUIRE(report.skipped.size() == 3);
    CHECK(report.skipped.at("only-here") == "absent from comparison corpus");
    CHECK(report.skipped.at("tiny") == "fewer than two scored sentences on one side");
    CHECK(report.skipped.at("zero-base") == "comparison mean is zero");
}

TEST_CASE("industry table classifies by first containing range") {
    const Ff48Table table = Ff48Table::parse(
        "sic_low,sic_high,industry\n"
        "6000,6099,Banks\n"
        "6100,6199,Credit\n");
    CHECK(table.range_count() == 2);
    CHECK(table.classify(6022) == "Banks");
    CHECK(table.classify(6099) == "Banks");
    CHECK(table.classify(6100) == "Credit");
    CHECK(table.classify(5999) == "Unclassified");
    CHECK(table.classify(6200) == "Unclassified");
    CHECK(table.classify(std::nullopt) == "Unclassified");
}

TEST_CASE("industry table rejects malformed and overlapping input") {
    CHECK_THROWS_WITH_AS(Ff48Table::parse("sic_low,sic_high,industry\n"
                                          "6000,6099,Banks\n"
                                          "6050,6150,Credit\n"),
                         doctest::Contains("overlap"), std::runtime_error);
    CHECK_THROWS_WITH_AS(Ff48Table::parse("sic_low,sic_high,industry\nx,200,A\n"),
                         doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_WITH_AS(Ff48Table::parse("sic_low,sic_high,industry\n300,200,A\n"),
                         doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_WITH_AS(Ff48Table::parse("sic_low,sic_high,industry\n100,200,\n"),
                         doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_WITH_AS(Ff48Table::parse("bad header\n"), doctest::Contains("line 1"),
                         std::runtime_error);
}

TEST_CASE("shipped industry table covers 48 industries") {
    const fs::path path = fs::path(EDGARTEXT_DATA_DIR) / "ff48.csv";
    const Ff48Table table = Ff48Table::from_file(path);
    CHECK(table.range_count() > 300);
    CHECK(table.classify(6022) == "Banks");
    CHECK(table.classify(3571) == "Computers");
    CHECK(table.classify(7372) == "Business Services");
    CHECK(table.classify(2836) == "Pharmaceutical Products");
    CHECK(table.classify(3674) == "Electronic Equipment");
    CHECK(table.classify(9999) == "Unclassified");

    // The raw file must name exactly 48 distinct industries.
    std::ifstream in(path);
    REQUIRE(in.good());
    std::set<std::string> industries;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        const auto comma = line.rfind(',');
        if (comma != std::string::npos && comma + 1 < line.size()) {
            industries.insert(line.substr(comma + 1));
        }
    }
    CHECK(industries.size() == 48);
}

TEST_CASE("volume statistics aggregate tokens by year, form, firm, and industry") {
    const TokenCounter counter = TokenCounter::whitespace();
    std::vector<DatasetRecord> records;

    DatasetRecord r1 = make_record("a-1", "alpha beta gamma", 1);
    r1.acceptance = DateTime{{2010, 3, 1}, 9, 0, 0};
    r1.cik = 100;
    r1.form_type = "10-K";
    r1.sic = 6022;
    DatasetRecord r2 = make_record("a-1", "delta epsilon zeta", 2);
    r2.acceptance = DateTime{{2010, 3, 1}, 9, 0, 0};
    r2.cik = 100;
    r2.form_type = "10-K";
    r2.sic = 6022;
    DatasetRecord r3 = make_record("b-1", "eta theta iota kappa", 1);
    r3.acceptance = DateTime{{2011, 7, 2}, 10, 0, 0};
    r3.cik = 200;
    r3.form_type = "8-K";
    r3.sic = std::nullopt;
    records = {r1, r2, r3};

    const VolumeReport plain = volume_stats(records, counter);
    CHECK(plain.tokenizer_id == "whitespace");
    CHECK(plain.total_tokens == 10);
    CHECK(plain.tokens_by_year == std::map<int, std::size_t>{{2010, 6}, {2011, 4}});
    CHECK(plain.tokens_by_form ==
          std::map<std::string, std::size_t>{{"10-K", 6}, {"8-K", 4}});
    CHECK(plain.tokens_by_cik ==
          std::map<std::int64_t, std::size_t>{{100, 6}, {200, 4}});
    CHECK(plain.main_tokens == 7);
    CHECK(plain.attachment_tokens == 3);
    CHECK(plain.tokens_by_industry.empty());

    const Ff48Table table = Ff48Table::parse(
        "sic_low,sic_high,industry\n"
        "6000,6099,Banks\n");
    const VolumeReport classified = volume_stats(records, counter, &table);
    CHECK(classified.tokens_by_industry ==
          std::map<std::string, std::size_t>{{"Banks", 6}, {"Unclassified", 4}});

    // Aggregation is order-independent.
    std::vector<DatasetRecord> reversed = {r3, r2, r1};
    const VolumeReport again = volume_stats(reversed, counter, &table);
    CHECK(again.tokens_by_year == classified.tokens_by_year);
    CHECK(again.tokens_by_form == classified.tokens_by_form);
    CHECK(again.tokens_by_cik == classified.tokens_by_cik);
    CHECK(again.tokens_by_industry == classified.tokens_by_industry);
    CHECK(again.total_tokens == classified.total_tokens);

    const VolumeReport empty = volume_stats({}, counter);
    CHECK(empty.total_tokens == 0);
    CHECK(empty.tokens_by_year.empty());
}
