// Small shared utilities: SHA-256 hex digests, exact hex serialization of
// Real values, atomic file writes.
#pragma once

#include <string>
#include <vector>

#include "weakring/numtypes.hpp"

namespace weakring {

std::string sha256_hex(const std::string& data);

// Exact round-trip encoding of a Real as an MPFR hex-float string ("0x1.8p+1"
// style); parsing restores the value bit-for-bit at the value's precision.
std::string real_to_hex(const Real& x);
Real real_from_hex(const std::string& s, unsigned precision_bits);

// Decimal rendering with a fixed number of significant digits (report output).
std::string real_to_decimal(const Real& x, unsigned sig_digits = 30);

// Writes via a temp file in the same directory followed by rename.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace weakring
