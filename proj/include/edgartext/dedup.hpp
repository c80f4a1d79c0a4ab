#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edgartext/time.hpp"

namespace edgartext {

/// Parameters of the near-duplicate detector.  The banding layout (20 bands
/// of 13 rows over 260 permutations) targets an 80% similarity threshold.
struct DedupConfig {
    std::size_t shingle_n = 5;
    std::size_t num_permutations = 260;
    std::size_t bands = 20;
    std::size_t rows = 13;
    double threshold = 0.8;
    std::size_t oversize_limit = 10000;
    std::uint64_t seed = 0;
};

/// 64-bit identifiers of a document's lowercased word n-grams.  Documents
/// with fewer than n words contribute a single whole-document shingle.
using ShingleSet = std::set<std::uint64_t>;

ShingleSet shingle(std::string_view text, std::size_t n = 5);

struct MinHashSignature {
    std::vector<std::uint32_t> components;
    std::uint64_t seed = 0;
};

/// Computes MinHash signatures with a fixed family of seeded universal hash
/// functions (a·x + b mod 2^61−1).  Construct once per (count, seed) pair and
/// reuse — coefficient generation dominates single-signature cost.
class MinHasher {
  public:
    MinHasher(std::size_t num_permutations, std::uint64_t seed);

    /// Throws std::invalid_argument on an empty shingle set: cleaning
    /// guarantees non-empty text upstream, so an empty set is a caller bug.
    MinHashSignature sign(const ShingleSet& shingles) const;

    std::uint64_t seed() const { return seed_; }
    std::size_t num_permutations() const { return coefficients_.size(); }

  private:
    std::vector<std::pair<std::uint64_t, std::uint64_t>> coefficients_;
    std::uint64_t seed_;
};

/// One-shot convenience over MinHasher.
MinHashSignature minhash(const ShingleSet& shingles, std::uint64_t seed,
                         std::size_t num_permutations = 260);

/// Fraction of equal components.  Throws std::invalid_argument on seed or
/// length mismatch.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

struct BandKey {
    std::uint32_t band = 0;
    std::uint64_t digest = 0;

    friend bool operator==(const BandKey&, const BandKey&) = default;
    friend auto operator<=>(const BandKey&, const BandKey&) = default;
};

/// One key per band; band b digests components [rows·b, rows·b + rows).
/// Throws std::invalid_argument unless bands · rows == component count.
std::vector<BandKey> band_keys(const MinHashSignature& sig, std::size_t bands = 20,
                               std::size_t rows = 13);

/// Banded index over inserted signatures.  Bucket membership is decided by
/// exact equality of the band's components (the digest only routes to a
/// bucket), so two documents are candidates iff some band matches exactly.
class LshIndex {
  public:
    explicit LshIndex(DedupConfig config);

    /// Throws std::invalid_argument on seed/size mismatch or duplicate id.
    void insert(const std::string& id, const MinHashSignature& sig);

    /// All previously inserted ids sharing at least one band with sig.
    std::set<std::string> find_candidates(const MinHashSignature& sig) const;

    /// Every unordered candidate pair (lexicographically ordered within the
    /// pair), deduplicated across bands.
    std::vector<std::pair<std::string, std::string>> candidate_edges() const;

    const std::map<std::string, MinHashSignature>& signatures() const { return signatures_; }
    const DedupConfig& config() const { return config_; }

  private:
    struct Bucket {
        std::vector<std::string> members;
    };

    DedupConfig config_;
    std::map<std::string, MinHashSignature> signatures_;
    // (band, digest) → member ids; exact-match verification happens on read.
    std::map<std::pair<std::uint32_t, std::uint64_t>, Bucket> buckets_;

    bool bands_equal(const MinHashSignature& a, const MinHashSignature& b,
                     std::uint32_t band) const;
};

struct DupCluster {
    std::vector<std::string> members;  // sorted
    std::string survivor;              // filled by select_survivors
    bool oversize = false;
};

/// Connected candidate components larger than oversize_limit become one
/// cluster each with every candidate edge accepted unverified; all other
/// candidate edges are kept only when the signature estimate reaches
/// threshold, and the resulting connected components of two or more members
/// become clusters.  Deterministic for a fixed index content regardless of
/// insertion order.
std::vector<DupCluster> resolve_clusters(const LshIndex& index, double threshold,
                                         std::size_t oversize_limit);

struct DocMeta {
    DateTime acceptance;
    std::string accession;
};

/// Picks each cluster's survivor — earliest acceptance, ties broken by
/// lexicographically smallest accession, then id — writes it into the
/// cluster, and returns the retained id set: every id in `universe` except
/// non-surviving cluster members.  Throws std::runtime_error naming the
/// document when a cluster member is missing from `universe`.
std::set<std::string> select_survivors(std::vector<DupCluster>& clusters,
                                       const std::map<std::string, DocMeta>& universe);

/// Fraction of corpus-A documents with at least one candidate in B whose
/// signature estimate reaches the index threshold; `match_count_out`
/// receives the absolute count.  Throws std::invalid_argument when A is
/// empty or signed with a different seed than B.
double cross_corpus_overlap(const std::vector<MinHashSignature>& corpus_a,
                            const LshIndex& corpus_b_index,
                            std::size_t* match_count_out = nullptr);

/// Binary signature cache: a parameters block, then one record per document
/// (id, seed, components as little-endian 32-bit words).  Reading with a
/// config whose parameters differ returns nullopt so callers recompute.
void write_signature_cache(const std::filesystem::path& path, const DedupConfig& config,
                           const std::map<std::string, MinHashSignature>& signatures);
std::optional<std::map<std::string, MinHashSignature>> read_signature_cache(
    const std::filesystem::path& path, const DedupConfig& config);

}  // namespace edgartext
