#pragma once

#include <complex>
#include <string>

namespace skewlab {

using Cplx = std::complex<double>;

/// Parse a complex scalar written as "a", "bi", "a+bi" or "a-bi"
/// (no spaces required, spaces tolerated). Throws std::invalid_argument.
Cplx parse_complex(const std::string& text);

/// Format with full round-trip precision, "re+imi" / "re-imi".
std::string format_complex(Cplx z);

/// Shortest round-trip decimal form of a double (printf %.17g).
std::string format_double(double x);

}  // namespace skewlab
