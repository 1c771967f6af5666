#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace uqvsim {

/// Names one effectiveness measure. Canonical spellings, as used for CSV
/// column headers and report keys:
///   AP, nDCG, nDCG@<k>, P@<k>, sDCG:b=<b>:bq=<bq>
struct MeasureId {
  enum class Kind { kAP, kNDCG, kPrecision, kSDCG };

  Kind kind = Kind::kAP;
  std::size_t cutoff = 0;  // nDCG: 0 means no cutoff; P@k: k >= 1
  double b = 2.0;          // sDCG rank-discount base
  double bq = 4.0;         // sDCG query-discount base

  static MeasureId ap() { return {Kind::kAP}; }
  static MeasureId ndcg(std::size_t cutoff = 0) {
    return {Kind::kNDCG, cutoff};
  }
  static MeasureId precision(std::size_t k);
  static MeasureId sdcg(double b, double bq);

  /// Throws DataError for names outside the grammar above.
  static MeasureId parse(std::string_view name);
  std::string name() const;

  /// Documented value range; sDCG is unbounded above.
  double min_value() const { return 0.0; }
  double max_value() const;

  bool operator==(const MeasureId&) const = default;
};

}  // namespace uqvsim
