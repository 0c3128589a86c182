#include "weakring/util.hpp"

#include <mpfr.h>
#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "weakring/errors.hpp"

namespace weakring {

const char* err_name(Err e) {
  switch (e) {
    case Err::PrecisionInsufficient: return "PrecisionInsufficient";
    case Err::RoundingAmbiguous: return "RoundingAmbiguous";
    case Err::RepeatedRootSuspected: return "RepeatedRootSuspected";
    case Err::PowerIterationDiverged: return "PowerIterationDiverged";
    case Err::SetTooLarge: return "SetTooLarge";
    case Err::AttackInfeasible: return "AttackInfeasible";
    case Err::SampleVariantMismatch: return "SampleVariantMismatch";
    case Err::NotCoprime: return "NotCoprime";
    case Err::DoesNotSplit: return "DoesNotSplit";
    case Err::DegreeMismatch: return "DegreeMismatch";
    case Err::FactorizationUnavailable: return "FactorizationUnavailable";
    case Err::FactoringBudgetExceeded: return "FactoringBudgetExceeded";
    case Err::ModulusTooLargeForOrderComputation: return "ModulusTooLargeForOrderComputation";
    case Err::SchemaViolation: return "SchemaViolation";
    case Err::IoFailure: return "IoFailure";
  }
  return "UnknownError";
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hexd = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hexd[md[i] >> 4]);
    out.push_back(hexd[md[i] & 0xF]);
  }
  return out;
}

std::string real_to_hex(const Real& x) {
  char* s = nullptr;
  mpfr_asprintf(&s, "%Ra", x.backend().data());
  std::string out(s);
  mpfr_free_str(s);
  return out;
}

Real real_from_hex(const std::string& s, unsigned precision_bits) {
  PrecisionGuard guard(precision_bits);
  Real x;
  if (mpfr_set_str(x.backend().data(), s.c_str(), 0, MPFR_RNDN) != 0) {
    throw Error(Err::SchemaViolation, "bad hex float literal: " + s);
  }
  return x;
}

std::string real_to_decimal(const Real& x, unsigned sig_digits) {
  return x.str(sig_digits);
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path dir = target.parent_path();
  if (dir.empty()) dir = ".";
  std::string tmpl = (dir / (target.filename().string() + ".tmpXXXXXX")).string();
  std::vector<char> tmp(tmpl.begin(), tmpl.end());
  tmp.push_back('\0');
  int fd = mkstemp(tmp.data());
  if (fd < 0) throw Error(Err::IoFailure, "mkstemp failed for " + path);
  std::string tmppath(tmp.data());
  {
    std::FILE* fp = fdopen(fd, "wb");
    if (!fp) throw Error(Err::IoFailure, "fdopen failed for " + tmppath);
    std::size_t written = std::fwrite(content.data(), 1, content.size(), fp);
    int rc = std::fclose(fp);
    if (written != content.size() || rc != 0) {
      std::remove(tmppath.c_str());
      throw Error(Err::IoFailure, "short write to " + tmppath);
    }
  }
  std::error_code ec;
  fs::rename(tmppath, target, ec);
  if (ec) {
    std::remove(tmppath.c_str());
    throw Error(Err::IoFailure, "rename to " + path + ": " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::IoFailure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace weakring
