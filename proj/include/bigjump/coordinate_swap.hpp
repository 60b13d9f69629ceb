#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bigjump/errors.hpp"

namespace bigjump {

// Position of the first coordinate attaining the maximum: the unique k with
// v[k] > v[j] for j < k and v[k] >= v[j] for j >= k. Zero-based.
inline std::size_t argmax_first(std::span<const double> v) {
    if (v.empty()) throw EmptyVector("argmax_first: empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

// Exchange coordinates j and n-1 (an involution). Zero-based j.
inline void sigma_swap_inplace(std::span<double> v, std::size_t j) {
    if (v.empty()) throw EmptyVector("sigma_swap: empty vector");
    if (j >= v.size()) throw IndexOutOfRange("sigma_swap: index out of range");
    std::swap(v[j], v[v.size() - 1]);
}

inline std::vector<double> sigma_swap(std::vector<double> v, std::size_t j) {
    sigma_swap_inplace(v, j);
    return v;
}

// Move the first maximum to the last slot; no arithmetic, so the sum and the
// coordinate multiset are preserved bit for bit.
inline void swap_max_last_inplace(std::span<double> v) { sigma_swap_inplace(v, argmax_first(v)); }

inline std::vector<double> swap_max_last(std::vector<double> v) {
    swap_max_last_inplace(v);
    return v;
}

}  // namespace bigjump
