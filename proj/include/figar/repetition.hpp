#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "figar/rng.hpp"

namespace figar {

/// Ordered set W of allowed repetition counts.
struct RepetitionSet {
    std::vector<int> values;  // strictly increasing, all >= 1
    std::string name;

    std::size_t size() const { return values.size(); }

    int index_of(int x) const {
        auto it = std::lower_bound(values.begin(), values.end(), x);
        if (it == values.end() || *it != x) {
            throw std::invalid_argument("RepetitionSet: " + std::to_string(x) + " not in W");
        }
        return static_cast<int>(it - values.begin());
    }

    bool contains(int x) const {
        return std::binary_search(values.begin(), values.end(), x);
    }

    static RepetitionSet from_values(std::vector<int> v, std::string label) {
        if (v.empty()) throw std::invalid_argument("RepetitionSet: empty");
        std::vector<int> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i] < 1) throw std::invalid_argument("RepetitionSet: values must be >= 1");
            if (i > 0 && sorted[i] == sorted[i - 1]) {
                throw std::invalid_argument("RepetitionSet: duplicate value " + std::to_string(sorted[i]));
            }
        }
        return {std::move(sorted), std::move(label)};
    }
};

namespace detail {

inline std::vector<int> range_set(int k) {
    std::vector<int> v(k);
    std::iota(v.begin(), v.end(), 1);
    return v;
}

inline std::vector<int> primes_below(int bound) {
    std::vector<int> out;
    for (int n = 2; n < bound; ++n) {
        bool prime = true;
        for (int d = 2; d * d <= n; ++d) {
            if (n % d == 0) {
                prime = false;
                break;
            }
        }
        if (prime) out.push_back(n);
    }
    return out;
}

/// k distinct values sampled without replacement from {1..bound}.
inline std::vector<int> sample_without_replacement(int k, int bound, std::uint64_t seed) {
    std::vector<int> pool = range_set(bound);
    Rng rng(derive_seed(seed, "repetition-set"));
    // Fisher-Yates prefix shuffle
    for (int i = 0; i < k; ++i) {
        std::size_t j = i + rng.index(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace detail

/// Builds a repetition-set variant by name:
///   figar-20 / figar-30 / figar-50  -> {1..k}
///   figar-30-50                     -> 30 values sampled from {1..50}
///   figar-20-30                     -> 20 values sampled from {1..30}
///   figar-p                         -> all primes below 50
///   singleton(c)                    -> {c}
///   explicit(a,b,c,...)             -> the listed values
inline RepetitionSet make_repetition_set(const std::string& variant, std::uint64_t master_seed) {
    if (variant == "figar-20") return RepetitionSet::from_values(detail::range_set(20), variant);
    if (variant == "figar-30") return RepetitionSet::from_values(detail::range_set(30), variant);
    if (variant == "figar-50") return RepetitionSet::from_values(detail::range_set(50), variant);
    if (variant == "figar-p") return RepetitionSet::from_values(detail::primes_below(50), variant);
    if (variant == "figar-30-50") {
        return RepetitionSet::from_values(detail::sample_without_replacement(30, 50, master_seed), variant);
    }
    if (variant == "figar-20-30") {
        return RepetitionSet::from_values(detail::sample_without_replacement(20, 30, master_seed), variant);
    }
    if (variant.rfind("figar-", 0) == 0) {
        // figar-k for any integer k
        try {
            int k = std::stoi(variant.substr(6));
            if (k >= 1) return RepetitionSet::from_values(detail::range_set(k), variant);
        } catch (const std::exception&) {
        }
    }
    if (variant.rfind("singleton(", 0) == 0 && variant.back() == ')') {
        int c = std::stoi(variant.substr(10, variant.size() - 11));
        if (c < 1) throw std::invalid_argument("singleton repetition must be >= 1");
        return RepetitionSet::from_values({c}, variant);
    }
    if (variant.rfind("explicit(", 0) == 0 && variant.back() == ')') {
        std::vector<int> vals;
        std::stringstream ss(variant.substr(9, variant.size() - 10));
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stoi(tok));
        return RepetitionSet::from_values(std::move(vals), variant);
    }
    throw std::invalid_argument("unknown repetition-set variant: " + variant);
}

}  // namespace figar
