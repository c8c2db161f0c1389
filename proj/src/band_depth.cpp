// Band depth with J = 3.
//
// For a query x and reference curve y, two bitmasks over the grid record where
// y <= x and where y >= x. A band formed by a subset S contains x at t iff some
// member of S is below x at t and some member is above it, so S contains x on
// the whole grid iff (OR of below masks) & (OR of above masks) is all ones.
// Enumerating all pairs and triples keeps the O(n^4) cost of the definition
// but makes each subset test O(p / 64).

#include <cstdint>
#include <vector>

#include "fdd/depths.hpp"
#include "fdd/parallel.hpp"

namespace fdd {

namespace {

using Word = std::uint64_t;

struct Masks {
    std::size_t words = 0;
    std::vector<Word> below;  // n x words
    std::vector<Word> above;
    std::vector<Word> full;
};

Masks build_masks(CurveView x, const FunctionalDataset& reference) {
    const std::size_t p = reference.points();
    const std::size_t n = reference.size();
    Masks m;
    m.words = (p + 63) / 64;
    m.below.assign(n * m.words, 0);
    m.above.assign(n * m.words, 0);
    m.full.assign(m.words, ~Word{0});
    if (p % 64 != 0) m.full.back() = (Word{1} << (p % 64)) - 1;
    for (std::size_t j = 0; j < n; ++j) {
        const auto y = reference.curve(j);
        for (std::size_t t = 0; t < p; ++t) {
            const Word bit = Word{1} << (t % 64);
            if (y[t] <= x[t]) m.below[j * m.words + t / 64] |= bit;
            if (y[t] >= x[t]) m.above[j * m.words + t / 64] |= bit;
        }
    }
    return m;
}

// Returns (#pairs containing x, #triples containing x).
std::pair<std::uint64_t, std::uint64_t> count_bands(const Masks& m, std::size_t n) {
    const std::size_t w = m.words;
    std::uint64_t pairs = 0, triples = 0;
    std::vector<Word> below2(w), above2(w);
    for (std::size_t a = 0; a < n; ++a) {
        const Word* ba = &m.below[a * w];
        const Word* aa = &m.above[a * w];
        for (std::size_t b = a + 1; b < n; ++b) {
            const Word* bb = &m.below[b * w];
            const Word* ab = &m.above[b * w];
            bool pair_ok = true;
            for (std::size_t k = 0; k < w; ++k) {
                below2[k] = ba[k] | bb[k];
                above2[k] = aa[k] | ab[k];
                pair_ok = pair_ok && (below2[k] & above2[k]) == m.full[k];
            }
            if (pair_ok) {
                // every superset of a containing pair also contains x
                pairs += 1;
                triples += n - b - 1;
                continue;
            }
            for (std::size_t c = b + 1; c < n; ++c) {
                const Word* bc = &m.below[c * w];
                const Word* ac = &m.above[c * w];
                bool ok = true;
                for (std::size_t k = 0; k < w && ok; ++k) ok = ((below2[k] | bc[k]) & (above2[k] | ac[k])) == m.full[k];
                triples += ok;
            }
        }
    }
    return {pairs, triples};
}

}  // namespace

DepthVector band_depth_j3(const FunctionalDataset& query, const FunctionalDataset& reference, unsigned threads) {
    if (query.points() != reference.points()) throw DimensionError("query and reference grids differ");
    const std::size_t n = reference.size();
    if (n < 3) throw DomainError("band depth with J=3 needs at least 3 reference curves, got " + std::to_string(n));
    const double n2 = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    const double n3 = n2 * static_cast<double>(n - 2) / 3.0;

    DepthVector out;
    out.method = DepthKind::Band3;
    out.values.assign(query.size(), 0.0);
    parallel_for(query.size(), threads, [&](std::size_t i) {
        const auto masks = build_masks(query.curve(i), reference);
        const auto [pairs, triples] = count_bands(masks, n);
        out.values[i] = static_cast<double>(pairs) / n2 + static_cast<double>(triples) / n3;
    });
    return out;
}

DepthVector band_depth_j3(const FunctionalDataset& ds, unsigned threads) { return band_depth_j3(ds, ds, threads); }

}  // namespace fdd
