#include "edgartext/dedup.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "edgartext/det_random.hpp"
#include "edgartext/hashing.hpp"
#include "edgartext/strings.hpp"

namespace edgartext {

namespace {

constexpr std::uint64_t kMersennePrime = (1ull << 61) - 1;

/// (a·x) mod 2^61−1 via 128-bit product folding.
std::uint64_t mulmod_p(std::uint64_t a, std::uint64_t x) {
    const auto prod = static_cast<unsigned __int128>(a) * x;
    auto lo = static_cast<std::uint64_t>(prod) & kMersennePrime;
    auto hi = static_cast<std::uint64_t>(prod >> 61);
    std::uint64_t r = lo + hi;
    if (r >= kMersennePrime) r -= kMersennePrime;
    return r;
}

std::uint64_t permute(std::uint64_t a, std::uint64_t b, std::uint64_t x) {
    std::uint64_t r = mulmod_p(a, x % kMersennePrime) + b;
    if (r >= kMersennePrime) r -= kMersennePrime;
    return r;
}

/// Union-find over indices.
class DisjointSets {
  public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

  private:
    std::vector<std::size_t> parent_;
};

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v & 0xFFFFFFFF));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

class ByteReader {
  public:
    explicit ByteReader(std::string_view data) : data_(data) {}
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]);
        }
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t lo = u32();
        std::uint64_t hi = u32();
        return lo | (hi << 32);
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string out(data_.substr(pos_, n));
        pos_ += n;
        return out;
    }
    bool at_end() const { return pos_ == data_.size(); }

  private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) {
            throw std::runtime_error("signature cache: truncated file");
        }
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

constexpr char kCacheMagic[4] = {'E', 'T', 'S', 'C'};
constexpr std::uint32_t kCacheVersion = 1;

}  // namespace

ShingleSet shingle(std::string_view text, std::size_t n) {
    const std::string lowered = to_lower(text);
    const std::vector<std::string_view> words = split_words(lowered);
    ShingleSet out;
    if (words.size() < n) {
        std::string whole;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i > 0) whole += ' ';
            whole += words[i];
        }
        out.insert(fnv1a64(whole));
        return out;
    }
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
        std::string gram;
        for (std::size_t j = 0; j < n; ++j) {
            if (j > 0) gram += ' ';
            gram += words[i + j];
        }
        out.insert(fnv1a64(gram));
    }
    return out;
}

MinHasher::MinHasher(std::size_t num_permutations, std::uint64_t seed) : seed_(seed) {
    std::mt19937_64 rng(seed);
    coefficients_.reserve(num_permutations);
    for (std::size_t i = 0; i < num_permutations; ++i) {
        std::uint64_t a = 1 + uniform_below(rng, kMersennePrime - 1);
        std::uint64_t b = uniform_below(rng, kMersennePrime);
        coefficients_.emplace_back(a, b);
    }
}

MinHashSignature MinHasher::sign(const ShingleSet& shingles) const {
    if (shingles.empty()) {
        throw std::invalid_argument("minhash: empty shingle set");
    }
    MinHashSignature sig;
    sig.seed = seed_;
    sig.components.reserve(coefficients_.size());
    for (const auto& [a, b] : coefficients_) {
        std::uint64_t best = kMersennePrime;
        for (std::uint64_t x : shingles) {
            best = std::min(best, permute(a, b, x));
        }
        sig.components.push_back(static_cast<std::uint32_t>(best & 0xFFFFFFFF));
    }
    return sig;
}

MinHashSignature minhash(const ShingleSet& shingles, std::uint64_t seed,
                         std::size_t num_permutations) {
    return MinHasher(num_permutations, seed).sign(shingles);
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.seed != b.seed) {
        throw std::invalid_argument("estimate_jaccard: signatures use different seeds");
    }
    if (a.components.size() != b.components.size() || a.components.empty()) {
        throw std::invalid_argument("estimate_jaccard: component count mismatch");
    }
    std::size_t equal = 0;
    for (std::size_t i = 0; i < a.components.size(); ++i) {
        if (a.components[i] == b.components[i]) ++equal;
    }
    return static_cast<double>(equal) / static_cast<double>(a.components.size());
}

std::vector<BandKey> band_keys(const MinHashSignature& sig, std::size_t bands, std::size_t rows) {
    if (bands * rows != sig.components.size()) {
        throw std::invalid_argument("band_keys: bands x rows must equal component count");
    }
    std::vector<BandKey> keys;
    keys.reserve(bands);
    for (std::size_t b = 0; b < bands; ++b) {
        std::string raw;
        raw.reserve(rows * 4);
        for (std::size_t r = 0; r < rows; ++r) {
            put_u32(raw, sig.components[b * rows + r]);
        }
        keys.push_back(BandKey{static_cast<std::uint32_t>(b), fnv1a64(raw)});
    }
    return keys;
}

LshIndex::LshIndex(DedupConfig config) : config_(config) {
    if (config_.bands * config_.rows != config_.num_permutations) {
        throw std::invalid_argument("LshIndex: bands x rows must equal permutation count");
    }
}

bool LshIndex::bands_equal(const MinHashSignature& a, const MinHashSignature& b,
                           std::uint32_t band) const {
    const std::size_t start = static_cast<std::size_t>(band) * config_.rows;
    for (std::size_t r = 0; r < config_.rows; ++r) {
        if (a.components[start + r] != b.components[start + r]) return false;
    }
    return true;
}

void LshIndex::insert(const std::string& id, const MinHashSignature& sig) {
    if (sig.seed != config_.seed) {
        throw std::invalid_argument("LshIndex::insert: signature seed mismatch");
    }
    if (sig.components.size() != config_.num_permutations) {
        throw std::invalid_argument("LshIndex::insert: signature size mismatch");
    }
    if (signatures_.count(id) != 0) {
        throw std::invalid_argument("LshIndex::insert: duplicate id " + id);
    }
    for (const BandKey& key : band_keys(sig, config_.bands, config_.rows)) {
        buckets_[{key.band, key.digest}].members.push_back(id);
    }
    signatures_.emplace(id, sig);
}

std::set<std::string> LshIndex::find_candidates(const MinHashSignature& sig) const {
    if (sig.seed != config_.seed || sig.components.size() != config_.num_permutations) {
        throw std::invalid_argument("LshIndex::find_candidates: signature mismatch");
    }
    std::set<std::string> out;
    for (const BandKey& key : band_keys(sig, config_.bands, config_.rows)) {
        auto it = buckets_.find({key.band, key.digest});
        if (it == buckets_.end()) continue;
        for (const std::string& id : it->second.members) {
            if (out.count(id)) continue;
            // The digest only routes; membership requires exact band equality.
            if (bands_equal(sig, signatures_.at(id), key.band)) out.insert(id);
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> LshIndex::candidate_edges() const {
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& [key, bucket] : buckets_) {
        if (bucket.members.size() < 2) continue;
        // Group members whose components in this band are exactly equal;
        // digest collisions across groups are not candidates.
        std::vector<std::string> sorted_members = bucket.members;
        std::sort(sorted_members.begin(), sorted_members.end());
        std::vector<std::vector<const std::string*>> groups;
        for (const std::string& id : sorted_members) {
            const MinHashSignature& sig = signatures_.at(id);
            bool placed = false;
            for (auto& group : groups) {
                if (bands_equal(sig, signatures_.at(*group.front()), key.first)) {
                    group.push_back(&id);
                    placed = true;
                    break;
                }
            }
            if (!placed) groups.push_back({&id});
        }
        for (const auto& group : groups) {
            for (std::size_t i = 0; i < group.size(); ++i) {
                for (std::size_t j = i + 1; j < group.size(); ++j) {
                    edges.emplace(*group[i], *group[j]);
                }
            }
        }
    }
    return {edges.begin(), edges.end()};
}

std::vector<DupCluster> resolve_clusters(const LshIndex& index, double threshold,
                                         std::size_t oversize_limit) {
    // Canonical id order makes the result independent of insertion order.
    std::vector<std::string> ids;
    ids.reserve(index.signatures().size());
    for (const auto& [id, sig] : index.signatures()) ids.push_back(id);
    std::map<std::string, std::size_t> id_index;
    for (std::size_t i = 0; i < ids.size(); ++i) id_index.emplace(ids[i], i);

    const auto edges = index.candidate_edges();

    // Phase 1: connected components of the unverified candidate graph.
    DisjointSets candidate_sets(ids.size());
    for (const auto& [a, b] : edges) {
        candidate_sets.unite(id_index.at(a), id_index.at(b));
    }
    std::map<std::size_t, std::size_t> component_size;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        ++component_size[candidate_sets.find(i)];
    }

    // Phase 2: oversize components keep every candidate edge unverified;
    // everything else keeps only edges whose estimate reaches the threshold.
    DisjointSets kept_sets(ids.size());
    std::set<std::size_t> oversize_roots;
    for (const auto& [root, size] : component_size) {
        if (size > oversize_limit) oversize_roots.insert(root);
    }
    for (const auto& [a, b] : edges) {
        const std::size_t ia = id_index.at(a);
        const std::size_t ib = id_index.at(b);
        if (oversize_roots.count(candidate_sets.find(ia)) != 0) {
            kept_sets.unite(ia, ib);
            continue;
        }
        const auto& sig_a = index.signatures().at(a);
        const auto& sig_b = index.signatures().at(b);
        if (estimate_jaccard(sig_a, sig_b) >= threshold) kept_sets.unite(ia, ib);
    }

    std::map<std::size_t, std::vector<std::size_t>> members_by_root;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        members_by_root[kept_sets.find(i)].push_back(i);
    }

    std::vector<DupCluster> clusters;
    for (const auto& [root, members] : members_by_root) {
        if (members.size() < 2) continue;
        DupCluster cluster;
        for (std::size_t i : members) cluster.members.push_back(ids[i]);
        std::sort(cluster.members.begin(), cluster.members.end());
        cluster.oversize = oversize_roots.count(candidate_sets.find(root)) != 0;
        clusters.push_back(std::move(cluster));
    }
    return clusters;
}

std::set<std::string> select_survivors(std::vector<DupCluster>& clusters,
                                       const std::map<std::string, DocMeta>& universe) {
    std::set<std::string> retained;
    for (const auto& [id, meta] : universe) retained.insert(id);

    for (DupCluster& cluster : clusters) {
        const std::string* best_id = nullptr;
        const DocMeta* best_meta = nullptr;
        for (const std::string& id : cluster.members) {
            auto it = universe.find(id);
            if (it == universe.end()) {
                throw std::runtime_error("select_survivors: no acceptance timestamp for document " +
                                         id);
            }
            const DocMeta& meta = it->second;
            if (best_id == nullptr ||
                std::tie(meta.acceptance, meta.accession, id) <
                    std::tie(best_meta->acceptance, best_meta->accession, *best_id)) {
                best_id = &id;
                best_meta = &meta;
            }
        }
        cluster.survivor = *best_id;
        for (const std::string& id : cluster.members) {
            if (id != cluster.survivor) retained.erase(id);
        }
    }
    return retained;
}

double cross_corpus_overlap(const std::vector<MinHashSignature>& corpus_a,
                            const LshIndex& corpus_b_index, std::size_t* match_count_out) {
    if (corpus_a.empty()) {
        throw std::invalid_argument("cross_corpus_overlap: empty corpus A");
    }
    const DedupConfig& config = corpus_b_index.config();
    std::size_t matches = 0;
    for (const MinHashSignature& sig : corpus_a) {
        if (sig.seed != config.seed || sig.components.size() != config.num_permutations) {
            throw std::invalid_argument("cross_corpus_overlap: parameter mismatch");
        }
        bool matched = false;
        for (const std::string& candidate : corpus_b_index.find_candidates(sig)) {
            if (estimate_jaccard(sig, corpus_b_index.signatures().at(candidate)) >=
                config.threshold) {
                matched = true;
                break;
            }
        }
        if (matched) ++matches;
    }
    if (match_count_out != nullptr) *match_count_out = matches;
    return static_cast<double>(matches) / static_cast<double>(corpus_a.size());
}

void write_signature_cache(const std::filesystem::path& path, const DedupConfig& config,
                           const std::map<std::string, MinHashSignature>& signatures) {
    std::string out;
    out.append(kCacheMagic, sizeof(kCacheMagic));
    put_u32(out, kCacheVersion);
    put_u32(out, static_cast<std::uint32_t>(config.shingle_n));
    put_u32(out, static_cast<std::uint32_t>(config.num_permutations));
    put_u32(out, static_cast<std::uint32_t>(config.bands));
    put_u32(out, static_cast<std::uint32_t>(config.rows));
    put_u64(out, config.seed);
    put_u64(out, signatures.size());
    for (const auto& [id, sig] : signatures) {
        put_u32(out, static_cast<std::uint32_t>(id.size()));
        out += id;
        put_u64(out, sig.seed);
        for (std::uint32_t component : sig.components) put_u32(out, component);
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("signature cache: cannot open for writing: " + path.string());
    }
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) {
        throw std::runtime_error("signature cache: write failed: " + path.string());
    }
}

std::optional<std::map<std::string, MinHashSignature>> read_signature_cache(
    const std::filesystem::path& path, const DedupConfig& config) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("signature cache: cannot open: " + path.string());
    }
    std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    ByteReader reader(data);
    if (reader.bytes(4) != std::string(kCacheMagic, sizeof(kCacheMagic))) {
        throw std::runtime_error("signature cache: bad magic");
    }
    if (reader.u32() != kCacheVersion) {
        throw std::runtime_error("signature cache: unsupported version");
    }
    const bool params_match = reader.u32() == config.shingle_n &&
                              reader.u32() == config.num_permutations &&
                              reader.u32() == config.bands && reader.u32() == config.rows &&
                              reader.u64() == config.seed;
    if (!params_match) return std::nullopt;

    std::map<std::string, MinHashSignature> signatures;
    const std::uint64_t count = reader.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t id_size = reader.u32();
        std::string id = reader.bytes(id_size);
        MinHashSignature sig;
        sig.seed = reader.u64();
        sig.components.reserve(config.num_permutations);
        for (std::size_t c = 0; c < config.num_permutations; ++c) {
            sig.components.push_back(reader.u32());
        }
        signatures.emplace(std::move(id), std::move(sig));
    }
    if (!reader.at_end()) {
        throw std::runtime_error("signature cache: trailing bytes");
    }
    return signatures;
}

}  // namespace edgartext
