#pragma once

#include "hcsec/core.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <vector>

namespace hcsec {

/// Hard partition of n points into k clusters with ids 0..k-1, every id used.
/// Built from arbitrary labels, ids are canonical: clusters are numbered in
/// order of their smallest member index.
class Clustering {
  public:
    Clustering() = default;

    /// Canonicalizes arbitrary (non-negative or negative) integer labels.
    template <typename Label>
    static Clustering from_labels(const std::vector<Label>& raw) {
        std::vector<std::size_t> labels(raw.size());
        std::map<Label, std::size_t> seen;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const auto [it, inserted] = seen.try_emplace(raw[i], seen.size());
            labels[i] = it->second;
        }
        return Clustering{std::move(labels), seen.size()};
    }

    /// Takes labels as given (not canonicalized); every id in [0,k) must occur.
    Clustering(std::vector<std::size_t> labels, std::size_t k)
      : labels_{std::move(labels)}
      , k_{k} {
        if (labels_.empty()) {
            throw invalid_argument{"clustering over zero points"};
        }
        if (k_ < 1) {
            throw invalid_argument{"clustering needs k >= 1"};
        }
        std::vector<bool> used(k_, false);
        for (auto l : labels_) {
            if (l >= k_) {
                throw invalid_argument{"cluster id out of range"};
            }
            used[l] = true;
        }
        if (std::find(used.begin(), used.end(), false) != used.end()) {
            throw invalid_argument{"clustering has an empty cluster id"};
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] std::size_t k() const noexcept { return k_; }
    [[nodiscard]] std::size_t operator[](std::size_t i) const { return labels_[i]; }
    [[nodiscard]] const std::vector<std::size_t>& labels() const noexcept { return labels_; }

    [[nodiscard]] std::vector<std::size_t> sizes() const {
        std::vector<std::size_t> s(k_, 0);
        for (auto l : labels_) {
            ++s[l];
        }
        return s;
    }

    [[nodiscard]] std::vector<std::vector<std::size_t>> members() const {
        std::vector<std::vector<std::size_t>> m(k_);
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            m[labels_[i]].push_back(i);
        }
        return m;
    }

    [[nodiscard]] Clustering canonical() const { return from_labels(labels_); }

    /// Label-permutation-independent equality.
    [[nodiscard]] bool same_partition(const Clustering& other) const {
        return other.size() == size() && canonical().labels_ == other.canonical().labels_;
    }

    friend bool operator==(const Clustering&, const Clustering&) = default;

  private:
    std::vector<std::size_t> labels_;
    std::size_t k_ = 0;
};

}  // namespace hcsec
