#ifndef SPP_POOLING_HPP
#define SPP_POOLING_HPP

#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "spp/errors.hpp"
#include "spp/patches.hpp"

namespace spp {

enum class PoolMode { max, average };

inline const char* to_string(PoolMode m) { return m == PoolMode::max ? "max" : "avg"; }

struct PoolingPyramid {
    std::vector<int> levels; // cells per dimension, strictly increasing

    void validate() const {
        if (levels.empty() || levels.front() < 1)
            throw ConfigInvalid("pyramid: need at least one level with c_1 >= 1");
        for (std::size_t i = 1; i < levels.size(); ++i)
            if (levels[i] <= levels[i - 1])
                throw ConfigInvalid("pyramid levels must be strictly increasing");
    }
};

inline int cell_count(const PoolingPyramid& pyr) {
    pyr.validate();
    int total = 0;
    for (int c : pyr.levels) total += c * c;
    return total;
}

// Band assignment of grid index a in [0,l) to cell in [0,c); contiguous
// near-equal bands, every band non-empty when c <= l.
inline int assign_cell(int a, int l, int c) {
    return static_cast<int>((static_cast<long long>(a) * c) / l);
}

// Pool a patch grid over every pyramid cell. Output layout: level-major,
// cells row-major within a level, the q feature coordinates innermost.
inline Vector pool(const PatchSet& ps, const PoolingPyramid& pyr, PoolMode mode) {
    pyr.validate();
    const int l = ps.l;
    if (pyr.levels.back() > l)
        throw PyramidTooDeep("pyramid level " + std::to_string(pyr.levels.back()) +
                             " exceeds patch grid size " + std::to_string(l));

    Vector out(static_cast<Eigen::Index>(cell_count(pyr)) * ps.q);
    Eigen::Index offset = 0;
    for (int c : pyr.levels) {
        const int cells = c * c;
        Matrix acc(ps.q, cells);
        if (mode == PoolMode::max) {
            acc.setConstant(-std::numeric_limits<double>::infinity());
        } else {
            acc.setZero();
        }
        std::vector<int> counts(static_cast<std::size_t>(cells), 0);

        for (int a = 0; a < l; ++a) {
            const int cy = assign_cell(a, l, c);
            for (int b = 0; b < l; ++b) {
                const int cell = cy * c + assign_cell(b, l, c);
                const Eigen::Index j = static_cast<Eigen::Index>(a) * l + b;
                if (mode == PoolMode::max)
                    acc.col(cell) = acc.col(cell).cwiseMax(ps.data.col(j));
                else
                    acc.col(cell) += ps.data.col(j);
                ++counts[static_cast<std::size_t>(cell)];
            }
        }
        for (int cell = 0; cell < cells; ++cell) {
            if (mode == PoolMode::average)
                acc.col(cell) /= static_cast<double>(counts[static_cast<std::size_t>(cell)]);
            out.segment(offset, ps.q) = acc.col(cell);
            offset += ps.q;
        }
    }
    return out;
}

// Concatenate per-scale pooled vectors in ascending patch-size order
// regardless of the order supplied.
inline Vector concat_scales(std::vector<std::pair<int, Vector>> per_scale) {
    if (per_scale.empty())
        throw InconsistentConfig("concat_scales: no scales supplied");
    std::sort(per_scale.begin(), per_scale.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < per_scale.size(); ++i)
        if (per_scale[i].first == per_scale[i - 1].first)
            throw InconsistentConfig("concat_scales: duplicate patch size");

    Eigen::Index total = 0;
    for (const auto& [r, v] : per_scale) total += v.size();
    Vector out(total);
    Eigen::Index offset = 0;
    for (const auto& [r, v] : per_scale) {
        out.segment(offset, v.size()) = v;
        offset += v.size();
    }
    return out;
}

} // namespace spp

#endif
