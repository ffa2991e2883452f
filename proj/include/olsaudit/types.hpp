#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace audit {

// Parse failure in a CSV cell. Row is the 1-based line number in the file
// (header is line 1), col is the column name.
class ParseError : public std::runtime_error {
public:
    ParseError(int row, std::string col, std::string text)
        : std::runtime_error("parse error at row " + std::to_string(row) + ", column '" + col +
                             "': offending text '" + text + "'"),
          row(row), column(std::move(col)), text(std::move(text)) {}
    int row;
    std::string column;
    std::string text;
};

class MissingColumn : public std::runtime_error {
public:
    explicit MissingColumn(const std::string& name)
        : std::runtime_error("missing column '" + name + "'"), name(name) {}
    std::string name;
};

class NotBinaryTreatment : public std::runtime_error {
public:
    explicit NotBinaryTreatment(const std::string& what) : std::runtime_error(what) {}
};

class EmptyGroup : public std::runtime_error {
public:
    explicit EmptyGroup(const std::string& what) : std::runtime_error(what) {}
};

class NotSymmetric : public std::runtime_error {
public:
    explicit NotSymmetric(const std::string& what) : std::runtime_error(what) {}
};

class SingularCovariance : public std::runtime_error {
public:
    explicit SingularCovariance(const std::string& what) : std::runtime_error(what) {}
};

// Enumeration guard of the brute-force oracle tripped.
class TooLarge : public std::runtime_error {
public:
    explicit TooLarge(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Sorted set of removed row indices.
struct SubsetMask {
    std::vector<int> removed;

    // Throws std::invalid_argument unless indices are unique, sorted and < n.
    void validate(int n) const;

    // Indices of [0,n) not in `removed`.
    std::vector<int> complement(int n) const;

    int size() const { return static_cast<int>(removed.size()); }
};

enum class BoundType { Lower, Upper, Exact };

// One method's claim about Stability. Upper/exact certificates carry the
// explicit removal set and are only constructed after a verifying refit.
struct StabilityCertificate {
    std::string method;
    BoundType bound_type = BoundType::Lower;
    int value = 0;
    std::vector<int> removal_set;  // upper/exact only
    bool verified = false;         // upper/exact: refit confirmed the flip
    std::string qualifier;         // e.g. beta-box caveat for B&B bounds
};

}  // namespace audit
