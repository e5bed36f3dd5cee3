#include "skewlab/complex.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace skewlab {

namespace {

// Strip spaces in place.
std::string compact(const std::string& s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '\t') out.push_back(c);
  return out;
}

}  // namespace

Cplx parse_complex(const std::string& text) {
  std::string s = compact(text);
  if (s.empty()) throw std::invalid_argument("empty complex literal");

  // Find the split between the real part and a trailing imaginary term:
  // the last '+'/'-' that is not part of an exponent and not leading.
  size_t split = std::string::npos;
  for (size_t i = s.size(); i-- > 1;) {
    char c = s[i];
    if ((c == '+' || c == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }

  auto to_double = [](const std::string& num) {
    if (num.empty() || num == "+" ) return 1.0;
    if (num == "-") return -1.0;
    char* end = nullptr;
    double v = std::strtod(num.c_str(), &end);
    if (end == nullptr || *end != '\0')
      throw std::invalid_argument("bad numeric literal '" + num + "'");
    return v;
  };

  if (s.back() == 'i' || s.back() == 'I') {
    std::string body = s.substr(0, s.size() - 1);
    if (split == std::string::npos)
      return Cplx(0.0, to_double(body));
    return Cplx(to_double(body.substr(0, split)), to_double(body.substr(split)));
  }
  if (split != std::string::npos && (s.find('i') != std::string::npos))
    throw std::invalid_argument("misplaced 'i' in complex literal '" + s + "'");
  return Cplx(to_double(s), 0.0);
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string format_complex(Cplx z) {
  std::string out = format_double(z.real());
  if (z.imag() >= 0.0 || z.imag() != z.imag()) out += "+";
  out += format_double(z.imag());
  out += "i";
  return out;
}

}  // namespace skewlab
