#include "weakring/poly.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <stdexcept>

#include "weakring/errors.hpp"

namespace weakring::ring {

using nlohmann::json;

IntPolynomial::IntPolynomial(std::vector<BigInt> coeffs) : c_(std::move(coeffs)) { trim(); }

IntPolynomial::IntPolynomial(std::initializer_list<long> coeffs) {
  c_.reserve(coeffs.size());
  for (long v : coeffs) c_.emplace_back(v);
  trim();
}

IntPolynomial IntPolynomial::x_pow(unsigned n) {
  std::vector<BigInt> c(n + 1, BigInt(0));
  c[n] = 1;
  return IntPolynomial(std::move(c));
}

const BigInt& IntPolynomial::operator[](std::size_t i) const {
  static const BigInt zero(0);
  return i < c_.size() ? c_[i] : zero;
}

void IntPolynomial::trim() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

IntPolynomial IntPolynomial::operator+(const IntPolynomial& o) const {
  std::vector<BigInt> c(std::max(c_.size(), o.c_.size()), BigInt(0));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = (*this)[i] + o[i];
  return IntPolynomial(std::move(c));
}

IntPolynomial IntPolynomial::operator-(const IntPolynomial& o) const {
  std::vector<BigInt> c(std::max(c_.size(), o.c_.size()), BigInt(0));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = (*this)[i] - o[i];
  return IntPolynomial(std::move(c));
}

IntPolynomial IntPolynomial::operator-() const {
  std::vector<BigInt> c(c_);
  for (auto& v : c) v = -v;
  return IntPolynomial(std::move(c));
}

IntPolynomial IntPolynomial::operator*(const IntPolynomial& o) const {
  if (is_zero() || o.is_zero()) return {};
  std::vector<BigInt> c(c_.size() + o.c_.size() - 1, BigInt(0));
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) c[i + j] += c_[i] * o.c_[j];
  return IntPolynomial(std::move(c));
}

IntPolynomial IntPolynomial::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<BigInt> c(c_.size() - 1);
  for (std::size_t i = 1; i < c_.size(); ++i) c[i - 1] = c_[i] * BigInt(i);
  return IntPolynomial(std::move(c));
}

BigInt IntPolynomial::eval(const BigInt& x) const {
  BigInt acc = 0;
  for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
  return acc;
}

void IntPolynomial::divmod(const IntPolynomial& a, const IntPolynomial& b,
                           IntPolynomial& q, IntPolynomial& r) {
  if (!b.is_monic()) throw std::invalid_argument("divmod requires a monic divisor");
  std::vector<BigInt> rem = a.c_;
  int db = b.degree();
  std::vector<BigInt> quo;
  if (a.degree() >= db) quo.assign(a.degree() - db + 1, BigInt(0));
  for (int i = a.degree(); i >= db; --i) {
    BigInt coef = rem[i];
    if (coef == 0) continue;
    quo[i - db] = coef;
    for (int j = 0; j <= db; ++j) rem[i - db + j] -= coef * b[j];
  }
  q = IntPolynomial(std::move(quo));
  r = IntPolynomial(std::move(rem));
}

IntPolynomial IntPolynomial::exact_divide(const IntPolynomial& a, const IntPolynomial& b) {
  IntPolynomial q, r;
  divmod(a, b, q, r);
  if (!r.is_zero()) throw std::invalid_argument("exact_divide: nonzero remainder");
  return q;
}

std::string IntPolynomial::to_json() const {
  json j;
  j["coeffs"] = json::array();
  for (const auto& v : c_) j["coeffs"].push_back(v.str());
  j["var"] = "x";
  return j.dump();
}

IntPolynomial IntPolynomial::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_array())
    throw Error(Err::SchemaViolation, "polynomial: expected {\"coeffs\": [...], \"var\": \"x\"}");
  std::vector<BigInt> c;
  for (const auto& v : j["coeffs"]) {
    if (!v.is_string()) throw Error(Err::SchemaViolation, "polynomial coeffs must be decimal strings");
    c.emplace_back(v.get<std::string>());
  }
  return IntPolynomial(std::move(c));
}

std::string IntPolynomial::to_string() const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int i = degree(); i >= 0; --i) {
    const BigInt& v = c_[i];
    if (v == 0) continue;
    if (!first) os << (v > 0 ? " + " : " - ");
    else if (v < 0) os << "-";
    BigInt a = abs(v);
    if (i == 0 || a != 1) os << a.str();
    if (i > 0) {
      os << "x";
      if (i > 1) os << "^" << i;
    }
    first = false;
  }
  return os.str();
}

}  // namespace weakring::ring
