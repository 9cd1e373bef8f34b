#pragma once

// Paragraph-level near-duplicate removal: MinHash over word 20-gram shingles,
// LSH banding at a 0.8 similarity threshold, band keys stored in a bloom
// filter that can be saved and reloaded across runs.

#include <algorithm>
#include <cmath>
#if defined(__linux__)
#include <sys/mman.h>
#endif
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "corpuskit/document.hpp"

namespace corpuskit::dedup {

struct DedupConfig {
    uint32_t shingle_size = 20;
    double collision_threshold = 0.8;
    double target_fp_rate = 1e-4;
    // Geometry chosen so (1/bands)^(1/rows) ≈ 0.825, inside the ±0.05 band
    // around the 0.8 threshold, with a collision probability of ~0.51 at
    // Jaccard 0.8 and ~4e-8 at 0.2.
    uint32_t num_hashes = 120;
    uint32_t lsh_bands = 10;
    uint32_t lsh_rows = 12;

    void validate() const {
        if (lsh_bands * lsh_rows != num_hashes)
            throw std::invalid_argument("dedup: bands*rows must equal num_hashes");
        if (!(target_fp_rate > 0.0 && target_fp_rate < 1.0))
            throw std::invalid_argument("dedup: target_fp_rate must be in (0,1)");
        double implied = std::pow(1.0 / static_cast<double>(lsh_bands),
                                  1.0 / static_cast<double>(lsh_rows));
        if (std::fabs(implied - collision_threshold) > 0.05)
            throw std::invalid_argument("dedup: banding threshold (1/b)^(1/r) not within 0.05 of collision_threshold");
        if (shingle_size == 0) throw std::invalid_argument("dedup: shingle_size must be positive");
    }

    uint64_t fingerprint() const {
        uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](uint64_t v) {
            h ^= v;
            h *= 0x100000001b3ULL;
        };
        mix(shingle_size);
        uint64_t bits;
        std::memcpy(&bits, &collision_threshold, 8);
        mix(bits);
        std::memcpy(&bits, &target_fp_rate, 8);
        mix(bits);
        mix(num_hashes);
        mix(lsh_bands);
        mix(lsh_rows);
        return h;
    }
};

// Probability that two chunks at Jaccard similarity s collide under banding.
inline double banding_collision_probability(double s, const DedupConfig& cfg) {
    return 1.0 - std::pow(1.0 - std::pow(s, static_cast<double>(cfg.lsh_rows)),
                          static_cast<double>(cfg.lsh_bands));
}

inline std::vector<std::string> split_paragraphs(std::string_view text) {
    std::vector<std::string> chunks;
    size_t start = 0;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            if (i > start) chunks.emplace_back(text.substr(start, i - start));
            start = i + 1;
        }
    }
    return chunks;
}

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Per-hash-function affine coefficients, derived deterministically.
struct HashFamily {
    std::vector<uint64_t> a, b;
    explicit HashFamily(uint32_t n) : a(n), b(n) {
        for (uint32_t i = 0; i < n; ++i) {
            a[i] = splitmix64(0x5EED0001ULL + i) | 1ULL;  // odd multiplier
            b[i] = splitmix64(0xC0FFEEULL + i);
        }
    }
};

// 8-byte stripes instead of byte-at-a-time FNV: the multiply chain is 1/8th
// as long, and the zero-padded tail is disambiguated by mixing in the length.
inline uint64_t hash_bytes(const char* p, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    size_t left = n;
    while (left >= 8) {
        uint64_t v;
        std::memcpy(&v, p, 8);
        h = (h ^ splitmix64(v)) * 0x100000001b3ULL;
        p += 8;
        left -= 8;
    }
    if (left) {
        uint64_t v = 0;
        std::memcpy(&v, p, left);
        h = (h ^ splitmix64(v)) * 0x100000001b3ULL;
    }
    return splitmix64(h ^ n);
}

// sig[i] = min(sig[i], a[i]*s + b[i]) for all i. This is the inner loop of
// minhash (num_hashes ops per shingle) and dominates dedup runtime; with
// AVX-512DQ the compiler turns it into vpmullq/vpminuq, 8 lanes at a time.
// Results are bit-identical either way.
inline void minhash_fold_scalar(uint64_t* sig, const uint64_t* a, const uint64_t* b,
                                uint32_t n, uint64_t s) {
    for (uint32_t i = 0; i < n; ++i) {
        uint64_t v = a[i] * s + b[i];
        if (v < sig[i]) sig[i] = v;
    }
}

#if defined(__x86_64__) && defined(__GNUC__)
__attribute__((target("avx512f,avx512dq")))
inline void minhash_fold_avx512(uint64_t* sig, const uint64_t* a, const uint64_t* b,
                                uint32_t n, uint64_t s) {
    for (uint32_t i = 0; i < n; ++i) {
        uint64_t v = a[i] * s + b[i];
        sig[i] = v < sig[i] ? v : sig[i];
    }
}
#endif

using MinhashFold = void (*)(uint64_t*, const uint64_t*, const uint64_t*, uint32_t, uint64_t);

inline MinhashFold pick_minhash_fold() {
#if defined(__x86_64__) && defined(__GNUC__)
    if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512dq"))
        return &minhash_fold_avx512;
#endif
    return &minhash_fold_scalar;
}

// out[i] = splitmix64(in[i] + add[i]) for all i; the per-row mix of every
// band key in one data-parallel pass. Bit-identical across implementations.
inline void splitmix_array_scalar(uint64_t* out, const uint64_t* in, const uint64_t* add,
                                  uint32_t n) {
    for (uint32_t i = 0; i < n; ++i) out[i] = splitmix64(in[i] + add[i]);
}

#if defined(__x86_64__) && defined(__GNUC__)
__attribute__((target("avx512f,avx512dq")))
inline void splitmix_array_avx512(uint64_t* out, const uint64_t* in, const uint64_t* add,
                                  uint32_t n) {
    for (uint32_t i = 0; i < n; ++i) {
        uint64_t x = in[i] + add[i] + 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        out[i] = x ^ (x >> 31);
    }
}
#endif

using SplitmixArray = void (*)(uint64_t*, const uint64_t*, const uint64_t*, uint32_t);

inline SplitmixArray pick_splitmix_array() {
#if defined(__x86_64__) && defined(__GNUC__)
    if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512dq"))
        return &splitmix_array_avx512;
#endif
    return &splitmix_array_scalar;
}

}  // namespace detail

using Signature = std::vector<uint64_t>;

// MinHash signature of a chunk over word shingle_size-grams, written into a
// caller-owned buffer so per-chunk callers can skip the allocation. Chunks
// shorter than shingle_size words hash as one whole-chunk shingle.
inline void minhash_signature_into(std::string_view chunk, const DedupConfig& cfg,
                                   Signature& sig) {
    static thread_local detail::HashFamily* family = nullptr;
    static thread_local uint32_t family_n = 0;
    if (family_n != cfg.num_hashes) {
        delete family;
        family = new detail::HashFamily(cfg.num_hashes);
        family_n = cfg.num_hashes;
    }
    const uint64_t* a = family->a.data();
    const uint64_t* b = family->b.data();
    const uint32_t n = cfg.num_hashes;
    sig.resize(n);
    // the first shingle initializes the signature outright: every lane starts
    // at ~0 and min(~0, v) is v, so no separate fill pass is needed
    auto init_from = [&](uint64_t s) {
        for (uint32_t i = 0; i < n; ++i) sig[i] = a[i] * s + b[i];
    };
    auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    // word boundaries on ASCII whitespace (chunks are single lines post-format);
    // count first so short chunks never materialize per-word state
    size_t nwords = 0;
    {
        bool prev_space = true;
        for (char c : chunk) {
            bool space = is_ws(c);
            nwords += static_cast<size_t>(!space && prev_space);
            prev_space = space;
        }
    }
    if (nwords < cfg.shingle_size) {
        init_from(detail::hash_bytes(chunk.data(), chunk.size()));
        return;
    }
    // per-word hashes first, then a rolling polynomial over them
    static thread_local std::vector<uint64_t> wh;
    wh.clear();
    wh.reserve(nwords);
    {
        size_t i = 0;
        while (i < chunk.size()) {
            while (i < chunk.size() && is_ws(chunk[i])) ++i;
            size_t s = i;
            while (i < chunk.size() && !is_ws(chunk[i])) ++i;
            if (i > s) wh.push_back(detail::hash_bytes(chunk.data() + s, i - s));
        }
    }
    const uint64_t B = 0x9E3779B97F4A7C15ULL;
    uint64_t Bn = 1;
    for (uint32_t k = 1; k < cfg.shingle_size; ++k) Bn *= B;
    uint64_t h = 0;
    for (uint32_t k = 0; k < cfg.shingle_size; ++k) h = h * B + wh[k];
    init_from(h);
    static const detail::MinhashFold fold = detail::pick_minhash_fold();
    for (size_t k = cfg.shingle_size; k < wh.size(); ++k) {
        h = (h - wh[k - cfg.shingle_size] * Bn) * B + wh[k];
        fold(sig.data(), a, b, n, h);
    }
}

inline Signature minhash_signature(std::string_view chunk, const DedupConfig& cfg) {
    Signature sig;
    minhash_signature_into(chunk, cfg, sig);
    return sig;
}

inline double estimate_jaccard(const Signature& x, const Signature& y) {
    if (x.size() != y.size() || x.empty()) return 0.0;
    size_t eq = 0;
    for (size_t i = 0; i < x.size(); ++i) eq += x[i] == y[i];
    return static_cast<double>(eq) / static_cast<double>(x.size());
}

class DedupFilter {
public:
    DedupFilter() = default;

    DedupFilter(const DedupConfig& cfg, uint64_t capacity_paragraphs) : cfg_(cfg) {
        cfg_.validate();
        capacity_ = capacity_paragraphs;
        // Each paragraph contributes `bands` keys; a paragraph query is an
        // OR over its bands, so the per-key budget is target/bands.
        double n = std::max<double>(1.0, static_cast<double>(capacity_) * cfg_.lsh_bands);
        double p = cfg_.target_fp_rate / static_cast<double>(cfg_.lsh_bands);
        // Blocked layout: a key hashes to one 512-bit block and sets k_ bits
        // inside it, so a probe costs one cache miss instead of k_. Size the
        // array from the per-block fill that meets the fp budget,
        // (1 - e^(-k q / 512))^k = p with q keys per block, padded 2.5x
        // because Poisson-loaded blocks above the mean dominate the fp rate.
        k_ = 8;
        double load = std::pow(p, 1.0 / 8.0);
        double per_block = -512.0 * std::log(1.0 - load) / 8.0;
        uint64_t m = static_cast<uint64_t>(std::ceil(n / per_block * 512.0 * 2.5));
        m = (std::max<uint64_t>(m, 512) + 511) / 512 * 512;
        allocate_bits(m / 64);
        nbits_ = m;
        fingerprint_ = cfg_.fingerprint();
    }

    const DedupConfig& config() const { return cfg_; }
    uint64_t fingerprint() const { return fingerprint_; }
    uint64_t capacity() const { return capacity_; }
    uint64_t insert_count() const { return inserts_; }
    uint64_t bit_count() const { return nbits_; }
    uint32_t hash_count() const { return k_; }
    bool over_capacity() const { return inserts_ > capacity_ + capacity_ / 10; }
    const std::vector<uint64_t>& raw_bits() const { return bits_; }

    bool operator==(const DedupFilter& o) const {
        return fingerprint_ == o.fingerprint_ && nbits_ == o.nbits_ && k_ == o.k_ &&
               capacity_ == o.capacity_ && inserts_ == o.inserts_ && bits_ == o.bits_;
    }

    // True iff any band key of the signature was present before this call;
    // afterwards all band keys are inserted.
    bool is_duplicate_and_insert(const Signature& sig) {
        check_signature(sig);
        // the probed blocks are spread over the whole bit array; issue all
        // the prefetches up front so the cache misses overlap
        static thread_local std::vector<uint64_t> keys, rowmix, rowadd;
        keys.resize(cfg_.lsh_bands);
        // per-row mixes for every band in one vectorizable pass, then a short
        // xor fold per band; identical to calling band_key per band
        if (rowadd.size() != cfg_.num_hashes) {
            rowadd.resize(cfg_.num_hashes);
            for (uint32_t i = 0; i < cfg_.num_hashes; ++i)
                rowadd[i] = static_cast<uint64_t>(i % cfg_.lsh_rows + 1) << 32;
        }
        rowmix.resize(cfg_.num_hashes);
        static const detail::SplitmixArray mix_rows = detail::pick_splitmix_array();
        mix_rows(rowmix.data(), sig.data(), rowadd.data(), cfg_.num_hashes);
        for (uint32_t band = 0; band < cfg_.lsh_bands; ++band) {
            const uint64_t* p = rowmix.data() + static_cast<size_t>(band) * cfg_.lsh_rows;
            uint64_t h = 0;
            for (uint32_t r = 0; r < cfg_.lsh_rows; ++r) h ^= p[r];
            keys[band] = detail::splitmix64(h ^ (band + 1));
            uint64_t h1 = detail::splitmix64(keys[band]);
            __builtin_prefetch(&bits_[block_index(h1) * 8], 1);
        }
        bool seen = false;
        for (uint32_t band = 0; band < cfg_.lsh_bands; ++band)
            seen |= probe_and_insert_key(keys[band]);
        ++inserts_;
        return seen;
    }

    bool contains(const Signature& sig) const {
        check_signature(sig);
        for (uint32_t band = 0; band < cfg_.lsh_bands; ++band)
            if (contains_key(band_key(sig, band))) return true;
        return false;
    }

    void save(std::ostream& out) const {
        auto w32 = [&](uint32_t v) { write_le(out, v); };
        auto w64 = [&](uint64_t v) { write_le(out, v); };
        out.write("GCBF", 4);
        w32(1);  // format version
        w32(cfg_.shingle_size);
        w64(double_bits(cfg_.collision_threshold));
        w64(double_bits(cfg_.target_fp_rate));
        w32(cfg_.num_hashes);
        w32(cfg_.lsh_bands);
        w32(cfg_.lsh_rows);
        w64(capacity_);
        w64(inserts_);
        w64(fingerprint_);
        w64(nbits_);
        w32(k_);
        for (uint64_t word : bits_) w64(word);
    }

    static DedupFilter load(std::istream& in) {
        char magic[4];
        in.read(magic, 4);
        if (!in || std::memcmp(magic, "GCBF", 4) != 0)
            throw std::runtime_error("dedup filter: bad magic");
        DedupFilter f;
        uint32_t version = read32(in);
        if (version != 1) throw std::runtime_error("dedup filter: unsupported version");
        f.cfg_.shingle_size = read32(in);
        f.cfg_.collision_threshold = bits_double(read64(in));
        f.cfg_.target_fp_rate = bits_double(read64(in));
        f.cfg_.num_hashes = read32(in);
        f.cfg_.lsh_bands = read32(in);
        f.cfg_.lsh_rows = read32(in);
        f.capacity_ = read64(in);
        f.inserts_ = read64(in);
        f.fingerprint_ = read64(in);
        f.nbits_ = read64(in);
        f.k_ = read32(in);
        if (!in) throw std::runtime_error("dedup filter: truncated header");
        if (f.fingerprint_ != f.cfg_.fingerprint())
            throw std::runtime_error("dedup filter: fingerprint does not match config");
        if (f.nbits_ == 0 || f.nbits_ % 512 != 0)
            throw std::runtime_error("dedup filter: bit count not block-aligned");
        f.allocate_bits((f.nbits_ + 63) / 64);
        for (auto& word : f.bits_) word = read64(in);
        if (!in) throw std::runtime_error("dedup filter: truncated bit array");
        return f;
    }

    void save_file(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write filter file: " + path);
        save(out);
    }

    static DedupFilter load_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open filter file: " + path);
        return load(in);
    }

private:
    void check_signature(const Signature& sig) const {
        if (sig.size() != cfg_.num_hashes)
            throw std::runtime_error("dedup: signature length does not match filter config");
    }

    // Rows are mixed independently and xor-combined so the row hashes can
    // overlap in the pipeline; a serial hash chain here costs as much as the
    // bloom probes themselves.
    uint64_t band_key(const Signature& sig, uint32_t band) const {
        const uint64_t* p = sig.data() + static_cast<size_t>(band) * cfg_.lsh_rows;
        uint64_t h = 0;
        for (uint32_t r = 0; r < cfg_.lsh_rows; ++r)
            h ^= detail::splitmix64(p[r] + (static_cast<uint64_t>(r + 1) << 32));
        return detail::splitmix64(h ^ (band + 1));
    }

    // Large arrays thrash the TLB under random probing; ask for huge pages
    // before the zero-fill first touch so the kernel can honor it.
    void allocate_bits(size_t words) {
        bits_.clear();
        bits_.reserve(words);
#if defined(__linux__) && defined(MADV_HUGEPAGE)
        if (words >= (4u << 20) / 8) {
            uintptr_t lo = reinterpret_cast<uintptr_t>(bits_.data());
            uintptr_t hi = lo + words * 8;
            lo = (lo + 4095) & ~uintptr_t(4095);
            hi &= ~uintptr_t(4095);
            if (hi > lo) madvise(reinterpret_cast<void*>(lo), hi - lo, MADV_HUGEPAGE);
        }
#endif
        bits_.resize(words, 0);
    }

    // multiply-high maps a 64-bit hash uniformly onto [0, num_blocks)
    // without the hardware divide a modulo would cost
    uint64_t block_index(uint64_t h) const {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(h) * (nbits_ >> 9)) >> 64);
    }

    // The k bit positions come from disjoint 9-bit fields of the two hashes;
    // an arithmetic progression (h1 + i*h2) would let keys with matching
    // strides mod 512 alias all k bits at once.
    bool contains_key(uint64_t key) const {
        uint64_t h1 = detail::splitmix64(key);
        uint64_t h2 = detail::splitmix64(key ^ 0xA5A5A5A5A5A5A5A5ULL);
        const uint64_t* block = bits_.data() + block_index(h1) * 8;
        for (uint32_t i = 0; i < k_; ++i) {
            uint64_t bit = (i < 7 ? h2 >> (9 * i) : h1) & 511;
            if (!(block[bit >> 6] & (1ULL << (bit & 63)))) return false;
        }
        return true;
    }

    // contains_key + insert_key in one block traversal: the key is hashed and
    // the block resolved once, and the membership test reuses the words the
    // bit-sets are about to touch anyway
    bool probe_and_insert_key(uint64_t key) {
        uint64_t h1 = detail::splitmix64(key);
        uint64_t h2 = detail::splitmix64(key ^ 0xA5A5A5A5A5A5A5A5ULL);
        uint64_t* block = bits_.data() + block_index(h1) * 8;
        unsigned missing = 0;
        for (uint32_t i = 0; i < k_; ++i) {
            uint64_t bit = (i < 7 ? h2 >> (9 * i) : h1) & 511;
            uint64_t mask = 1ULL << (bit & 63);
            uint64_t word = block[bit >> 6];
            missing |= static_cast<unsigned>(!(word & mask));
            block[bit >> 6] = word | mask;
        }
        return missing == 0;
    }

    void insert_key(uint64_t key) {
        uint64_t h1 = detail::splitmix64(key);
        uint64_t h2 = detail::splitmix64(key ^ 0xA5A5A5A5A5A5A5A5ULL);
        uint64_t* block = bits_.data() + block_index(h1) * 8;
        for (uint32_t i = 0; i < k_; ++i) {
            uint64_t bit = (i < 7 ? h2 >> (9 * i) : h1) & 511;
            block[bit >> 6] |= 1ULL << (bit & 63);
        }
    }

    template <typename T>
    static void write_le(std::ostream& out, T v) {
        unsigned char buf[sizeof(T)];
        for (size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        out.write(reinterpret_cast<const char*>(buf), sizeof(T));
    }
    static uint32_t read32(std::istream& in) {
        unsigned char buf[4];
        in.read(reinterpret_cast<char*>(buf), 4);
        return static_cast<uint32_t>(buf[0]) | (static_cast<uint32_t>(buf[1]) << 8) |
               (static_cast<uint32_t>(buf[2]) << 16) | (static_cast<uint32_t>(buf[3]) << 24);
    }
    static uint64_t read64(std::istream& in) {
        unsigned char buf[8];
        in.read(reinterpret_cast<char*>(buf), 8);
        uint64_t v = 0;
        for (size_t i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
        return v;
    }
    static uint64_t double_bits(double d) {
        uint64_t v;
        std::memcpy(&v, &d, 8);
        return v;
    }
    static double bits_double(uint64_t v) {
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }

    DedupConfig cfg_;
    std::vector<uint64_t> bits_;
    uint64_t nbits_ = 0;
    uint32_t k_ = 0;
    uint64_t capacity_ = 0;
    uint64_t inserts_ = 0;
    uint64_t fingerprint_ = 0;
};

// Removes already-seen chunks; nullopt means every chunk was a duplicate and
// the document is dropped (caller accounts for it in the ledger).
inline std::optional<Document> dedup_document(const Document& doc, DedupFilter& filter) {
    std::string kept;
    bool any = false;
    std::string_view text = doc.text;
    size_t start = 0;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i != text.size() && text[i] != '\n') continue;
        if (i > start) {
            std::string_view chunk = text.substr(start, i - start);
            static thread_local Signature sig;
            minhash_signature_into(chunk, filter.config(), sig);
            if (!filter.is_duplicate_and_insert(sig)) {
                if (any) kept.push_back('\n');
                kept += chunk;
                any = true;
            }
        }
        start = i + 1;
    }
    if (!any) return std::nullopt;
    Document out = doc;
    out.text = std::move(kept);
    return out;
}

}  // namespace corpuskit::dedup
