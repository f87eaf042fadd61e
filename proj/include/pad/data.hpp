#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pad/spline.hpp"
#include "pad/tensor.hpp"

namespace pad {

struct RawSequence {
  std::vector<double> times;
  Tensor values;                    // T x N
  std::vector<bool> anomaly_flags;  // empty when the source has no labels
  std::vector<std::string> channel_names;
  std::string source_name;

  std::size_t length() const noexcept { return times.size(); }
  std::size_t n_channels() const noexcept { return values.cols(); }
  bool labeled() const noexcept { return !anomaly_flags.empty(); }
  std::size_t flagged_count() const noexcept;
};

void validate_sequence(const RawSequence& seq);

// Deterministic child seed for an independent RNG stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// ---------------------------------------------------------------------------
// Anomaly-implant augmentation.

struct AugmentSpec {
  double gamma = 0.0;  // target ratio of implanted to original observations
  std::size_t min_len = 100;
  std::size_t max_len = 500;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ImplantedSegment {
  std::size_t start;   // position in the augmented sequence
  std::size_t length;
  std::size_t source;  // start of the copied range in the original sequence
};

struct AugmentResult {
  RawSequence sequence;
  std::vector<ImplantedSegment> implants;
  // For each augmented observation, the original index it was copied from.
  std::vector<std::size_t> origin;
  // True for observations of the original sequence (not copies).
  std::vector<bool> is_original;
};

// Copies random stretches of the original sequence to random positions until
// the implanted length exceeds gamma * T. Implants are flagged anomalous,
// originals stay normal, and spacing follows the source observations.
AugmentResult augment_with_trace(const RawSequence& seq, const AugmentSpec& spec);
RawSequence augment(const RawSequence& seq, const AugmentSpec& spec);

// ---------------------------------------------------------------------------
// Windowing.

// Consecutive non-overlapping windows of exactly `size` observations; a
// trailing partial window is dropped.
std::vector<TimeSeriesWindow> window_split(const RawSequence& seq, std::size_t size);

struct BatchSample {
  TimeSeriesWindow input;
  TimeSeriesWindow teacher;  // starts where `input` ends
  int label = 0;             // anomaly label of `input`
  int poa_label = 0;         // 1 when one of the next p observations is flagged
};

// One sample per window that has a successor. The teacher window holds the
// first p observations of the successor; for p == 1 the last observation of
// the input is prepended so the path has two knots.
std::vector<BatchSample> make_batch_samples(std::span<const TimeSeriesWindow> windows,
                                            std::size_t horizon);

// Keeps ceil((1 - ratio) * n) observations chosen uniformly at random, in
// order. For a fixed seed the survivors of a larger ratio are a subset of
// those of a smaller one.
TimeSeriesWindow drop_observations(const TimeSeriesWindow& window, double ratio,
                                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// Min-max scaling fitted on training data.

struct NormalizationStats {
  std::vector<double> min;
  std::vector<double> max;
};

NormalizationStats fit_normalization(std::span<const RawSequence> train);
// Maps each channel to [0, 1] over the training range; constant channels map to 0.5.
RawSequence apply_normalization(const RawSequence& seq, const NormalizationStats& stats);
RawSequence denormalize(const RawSequence& seq, const NormalizationStats& stats);

struct NormalizedSplits {
  std::vector<RawSequence> train;
  std::vector<RawSequence> apply;
  NormalizationStats stats;
};
NormalizedSplits normalize(std::span<const RawSequence> train, std::span<const RawSequence> apply);

// ---------------------------------------------------------------------------
// Synthetic benchmark data.

struct SyntheticConfig {
  std::size_t length = 20000;  // T
  std::size_t n_channels = 4;  // N
  std::size_t anomaly_count = 24;
  std::size_t precursor_len = 40;
  std::size_t min_len = 100;
  std::size_t max_len = 500;
  // When > 0, segment lengths are adjusted so flagged points total round(ratio * T).
  double anomaly_ratio = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticSegment {
  std::size_t start;
  std::size_t length;
  bool level_shift;  // false: oscillating burst
};

struct SyntheticSequence {
  RawSequence sequence;
  std::vector<SyntheticSegment> anomalies;
};

// Multichannel sinusoids plus Gaussian noise. Each anomaly (level shift or
// burst) is preceded by an unflagged linear ramp of precursor_len points.
SyntheticSequence generate_synthetic_detailed(const SyntheticConfig& config);
RawSequence generate_synthetic(const SyntheticConfig& config);

// Splits a sequence chronologically at floor(fraction * T).
std::pair<RawSequence, RawSequence> split_sequence(const RawSequence& seq, double fraction);

// ---------------------------------------------------------------------------
// CSV: header row of channel names with optional "timestamp" and "label" columns.

RawSequence load_csv(const std::filesystem::path& path);
RawSequence parse_csv(std::string_view text, const std::string& source_name = "<memory>");
void save_csv(const RawSequence& seq, const std::filesystem::path& path);
std::string format_csv(const RawSequence& seq);

}  // namespace pad
