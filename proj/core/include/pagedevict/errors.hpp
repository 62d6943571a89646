// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pagedevict {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Allocation was required but the page pool's free list is empty.
class PoolExhausted : public Error {
public:
    PoolExhausted() : Error("page pool exhausted") {}
    explicit PoolExhausted(const std::string& what) : Error(what) {}
};

/// A logical page index outside [0, page_count).
class IndexOutOfRange : public Error {
public:
    explicit IndexOutOfRange(const std::string& what) : Error(what) {}
};

/// No retained token with the requested position exists.
class UnknownPosition : public Error {
public:
    explicit UnknownPosition(const std::string& what) : Error(what) {}
};

/// Integer product exceeds the widest supported integer.
class Overflow : public Error {
public:
    explicit Overflow(const std::string& what) : Error(what) {}
};

/// Page-level scoring requested on a page with no occupied slots.
class EmptyPage : public Error {
public:
    EmptyPage() : Error("page has no occupied slots") {}
};

/// Selection size k exceeds the candidate count.
class KTooLarge : public Error {
public:
    explicit KTooLarge(const std::string& what) : Error(what) {}
};

/// Page ranking requested with no eligible pages.
class NoEligiblePage : public Error {
public:
    NoEligiblePage() : Error("no eligible page to rank") {}
};

/// Policy configuration violates a budget constraint.
class BudgetInvalid : public Error {
public:
    explicit BudgetInvalid(const std::string& what) : Error(what) {}
};

/// Attention requested over a cache with no retained tokens.
class EmptyCache : public Error {
public:
    EmptyCache() : Error("attention requires at least one retained token") {}
};

/// Two vectors that must agree in length do not.
class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& what) : Error(what) {}
};

/// Aggregation over an empty record set.
class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error(what) {}
};

/// File or stream write failure.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

} // namespace pagedevict
