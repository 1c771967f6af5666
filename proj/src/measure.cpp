#include "uqvsim/measure.hpp"

#include <charconv>
#include <cstdio>
#include <limits>

#include "uqvsim/error.hpp"

namespace uqvsim {
namespace {

bool parse_size(std::string_view text, std::size_t& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_real(std::string_view text, double& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

MeasureId MeasureId::precision(std::size_t k) {
  if (k == 0) throw DataError("P@k requires k >= 1");
  return {Kind::kPrecision, k};
}

MeasureId MeasureId::sdcg(double b, double bq) {
  if (!(b > 1.0) || !(bq > 1.0))
    throw DataError("sDCG requires b > 1 and bq > 1");
  MeasureId id{Kind::kSDCG};
  id.b = b;
  id.bq = bq;
  return id;
}

MeasureId MeasureId::parse(std::string_view name) {
  const auto unknown = [&] {
    return DataError("unknown measure: " + std::string(name));
  };
  if (name == "AP") return ap();
  if (name == "nDCG") return ndcg();
  std::size_t k = 0;
  if (name.starts_with("nDCG@")) {
    if (!parse_size(name.substr(5), k) || k == 0) throw unknown();
    return ndcg(k);
  }
  if (name.starts_with("P@")) {
    if (!parse_size(name.substr(2), k) || k == 0) throw unknown();
    return precision(k);
  }
  if (name.starts_with("sDCG:b=")) {
    auto rest = name.substr(7);
    auto sep = rest.find(":bq=");
    double b = 0.0;
    double bq = 0.0;
    if (sep == std::string_view::npos || !parse_real(rest.substr(0, sep), b) ||
        !parse_real(rest.substr(sep + 4), bq) || !(b > 1.0) || !(bq > 1.0))
      throw unknown();
    return sdcg(b, bq);
  }
  throw unknown();
}

std::string MeasureId::name() const {
  switch (kind) {
    case Kind::kAP:
      return "AP";
    case Kind::kNDCG:
      return cutoff == 0 ? "nDCG" : "nDCG@" + std::to_string(cutoff);
    case Kind::kPrecision:
      return "P@" + std::to_string(cutoff);
    case Kind::kSDCG:
      return "sDCG:b=" + short_real(b) + ":bq=" + short_real(bq);
  }
  return {};
}

double MeasureId::max_value() const {
  return kind == Kind::kSDCG ? std::numeric_limits<double>::infinity() : 1.0;
}

}  // namespace uqvsim
