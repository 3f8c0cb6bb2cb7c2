#pragma once

#include <stdexcept>
#include <string>

namespace potlab {

/// Base for all potlab errors. `code()` is a stable kebab-case identifier
/// (e.g. "invalid-annulus") suitable for machine-readable reports.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Malformed or out-of-contract input (bad config, unparsable manifold
/// string, invalid ranges). CLI maps these to exit code 1.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical construction or invariant failed at run time (diverged
/// integrand, unreachable gap target, failed inequality). CLI maps these
/// to exit code 2 together with the failing invariant's name.
class ConstructionError : public Error {
public:
    using Error::Error;
};

inline InputError invalid_range(const std::string& w) { return {"invalid-range", w}; }
inline InputError invalid_annulus(const std::string& w) { return {"invalid-annulus", w}; }
inline InputError unsupported_dimension(const std::string& w) { return {"unsupported-dimension", w}; }
inline InputError invalid_condenser(const std::string& w) { return {"invalid-condenser", w}; }
inline InputError domain_error(const std::string& w) { return {"domain-error", w}; }
inline InputError range_error(const std::string& w) { return {"range-error", w}; }
inline InputError parse_error(const std::string& w) { return {"parse-error", w}; }
inline InputError table_range(const std::string& w) { return {"table-range", w}; }
inline InputError invalid_compactum(const std::string& w) { return {"invalid-compactum", w}; }

inline ConstructionError diverged_integrand(const std::string& w) { return {"diverged-integrand", w}; }
inline ConstructionError degenerate_levels(const std::string& w) { return {"degenerate-levels", w}; }
inline ConstructionError invalid_witness(const std::string& w) { return {"invalid-witness", w}; }
inline ConstructionError cannot_construct(const std::string& w) { return {"cannot-construct", w}; }
inline ConstructionError grid_too_small(const std::string& w) { return {"grid-too-small", w}; }
inline ConstructionError evans_undefined(const std::string& w) { return {"evans-undefined", w}; }
inline ConstructionError assertion_failure(const std::string& invariant, const std::string& w) {
    return {"assertion-failure", invariant + ": " + w};
}

} // namespace potlab
