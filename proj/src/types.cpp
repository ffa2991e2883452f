#include "olsaudit/types.hpp"

#include <stdexcept>

namespace audit {

void SubsetMask::validate(int n) const {
    int prev = -1;
    for (int idx : removed) {
        if (idx <= prev) throw std::invalid_argument("SubsetMask: indices not sorted unique");
        if (idx < 0 || idx >= n) throw std::invalid_argument("SubsetMask: index out of range");
        prev = idx;
    }
}

std::vector<int> SubsetMask::complement(int n) const {
    validate(n);
    std::vector<int> kept;
    kept.reserve(n - static_cast<int>(removed.size()));
    size_t r = 0;
    for (int i = 0; i < n; ++i) {
        if (r < removed.size() && removed[r] == i)
            ++r;
        else
            kept.push_back(i);
    }
    return kept;
}

}  // namespace audit
