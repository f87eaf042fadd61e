#include "pad/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "pad/errors.hpp"

namespace pad {

std::size_t RawSequence::flagged_count() const noexcept {
  return static_cast<std::size_t>(std::count(anomaly_flags.begin(), anomaly_flags.end(), true));
}

void validate_sequence(const RawSequence& seq) {
  if (seq.values.rows() != seq.times.size()) {
    throw InputError("sequence has " + std::to_string(seq.values.rows()) + " rows but " +
                     std::to_string(seq.times.size()) + " timestamps");
  }
  if (seq.labeled() && seq.anomaly_flags.size() != seq.times.size()) {
    throw InputError("anomaly flag count does not match sequence length");
  }
  for (std::size_t i = 1; i < seq.times.size(); ++i) {
    if (!(seq.times[i] > seq.times[i - 1])) {
      throw InputError("sequence timestamps must be strictly increasing (index " +
                       std::to_string(i) + ")");
    }
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 over the combined value
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------

void AugmentSpec::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("augment gamma must lie in [0, 1)");
  if (min_len == 0 || min_len > max_len) throw ConfigError("augment needs 0 < min_len <= max_len");
}

AugmentResult augment_with_trace(const RawSequence& seq, const AugmentSpec& spec) {
  spec.validate();
  validate_sequence(seq);
  if (seq.flagged_count() != 0) {
    throw InputError("augmentation expects an unlabeled or all-normal training sequence");
  }
  const std::size_t T = seq.length();
  AugmentResult result;
  result.origin.resize(T);
  std::iota(result.origin.begin(), result.origin.end(), std::size_t{0});
  result.is_original.assign(T, true);

  if (spec.gamma > 0.0) {
    if (T < spec.max_len) {
      throw InputError("sequence length " + std::to_string(T) +
                       " is shorter than the maximum implant length " + std::to_string(spec.max_len));
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::size_t> length_dist(spec.min_len, spec.max_len);
    std::size_t L = T;
    while (static_cast<double>(L - T) / static_cast<double>(T) <= spec.gamma) {
      const std::size_t len = length_dist(rng);
      const std::size_t source = std::uniform_int_distribution<std::size_t>(0, T - len)(rng);
      // Insert between two original observations so implants never touch.
      std::uniform_int_distribution<std::size_t> pos_dist(1, L - 1);
      std::size_t start = pos_dist(rng);
      while (!result.is_original[start - 1] || !result.is_original[start]) start = pos_dist(rng);

      std::vector<std::size_t> copy(len);
      std::iota(copy.begin(), copy.end(), source);
      result.origin.insert(result.origin.begin() + static_cast<std::ptrdiff_t>(start), copy.begin(),
                           copy.end());
      result.is_original.insert(result.is_original.begin() + static_cast<std::ptrdiff_t>(start), len,
                                false);
      for (auto& seg : result.implants) {
        if (seg.start >= start) seg.start += len;
      }
      result.implants.push_back({start, len, source});
      L += len;
    }
    std::sort(result.implants.begin(), result.implants.end(),
              [](const ImplantedSegment& a, const ImplantedSegment& b) { return a.start < b.start; });
  }

  const std::size_t L = result.origin.size();
  const std::size_t N = seq.n_channels();
  RawSequence& out = result.sequence;
  out.channel_names = seq.channel_names;
  out.source_name = seq.source_name;
  out.values = Tensor(L, N);
  out.times.resize(L);
  out.anomaly_flags.resize(L);
  auto spacing = [&](std::size_t src) {
    if (T < 2) return 1.0;
    return src == 0 ? seq.times[1] - seq.times[0] : seq.times[src] - seq.times[src - 1];
  };
  for (std::size_t i = 0; i < L; ++i) {
    const std::size_t src = result.origin[i];
    for (std::size_t c = 0; c < N; ++c) out.values(i, c) = seq.values(src, c);
    out.anomaly_flags[i] = !result.is_original[i];
    out.times[i] = i == 0 ? seq.times[0] : out.times[i - 1] + spacing(src);
  }
  return result;
}

RawSequence augment(const RawSequence& seq, const AugmentSpec& spec) {
  if (spec.gamma == 0.0) {
    spec.validate();
    return seq;
  }
  return augment_with_trace(seq, spec).sequence;
}

// ---------------------------------------------------------------------------

std::vector<TimeSeriesWindow> window_split(const RawSequence& seq, std::size_t size) {
  if (size < 2) throw ConfigError("window size must be >= 2");
  validate_sequence(seq);
  const std::size_t count = seq.length() / size;
  const std::size_t N = seq.n_channels();
  std::vector<TimeSeriesWindow> windows(count);
  for (std::size_t w = 0; w < count; ++w) {
    TimeSeriesWindow& win = windows[w];
    win.window_index = w;
    win.values = Tensor(size, N);
    win.times.resize(size);
    for (std::size_t j = 0; j < size; ++j) {
      const std::size_t i = w * size + j;
      win.times[j] = seq.times[i];
      for (std::size_t c = 0; c < N; ++c) win.values(j, c) = seq.values(i, c);
    }
    if (seq.labeled()) {
      win.anomaly_flags.assign(seq.anomaly_flags.begin() + static_cast<std::ptrdiff_t>(w * size),
                               seq.anomaly_flags.begin() + static_cast<std::ptrdiff_t>((w + 1) * size));
    }
  }
  return windows;
}

namespace {

TimeSeriesWindow slice_rows(const TimeSeriesWindow& src, std::span<const std::size_t> rows) {
  TimeSeriesWindow out;
  out.window_index = src.window_index;
  out.values = Tensor(rows.size(), src.n_channels());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.times.push_back(src.times[rows[k]]);
    for (std::size_t c = 0; c < src.n_channels(); ++c) out.values(k, c) = src.values(rows[k], c);
    if (src.labeled()) out.anomaly_flags.push_back(src.anomaly_flags[rows[k]]);
  }
  return out;
}

}  // namespace

std::vector<BatchSample> make_batch_samples(std::span<const TimeSeriesWindow> windows,
                                            std::size_t horizon) {
  if (horizon == 0) throw ConfigError("PoA horizon must be >= 1");
  std::vector<BatchSample> samples;
  for (std::size_t i = 0; i + 1 < windows.size(); ++i) {
    const TimeSeriesWindow& cur = windows[i];
    const TimeSeriesWindow& next = windows[i + 1];
    if (next.window_index != cur.window_index + 1) {
      throw InputError("windows passed to make_batch_samples are not consecutive");
    }
    if (horizon > next.n_obs()) {
      throw ConfigError("PoA horizon " + std::to_string(horizon) + " exceeds window length " +
                        std::to_string(next.n_obs()));
    }
    BatchSample s;
    s.input = cur;
    s.label = cur.label();
    std::vector<std::size_t> rows(horizon);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    TimeSeriesWindow ahead = slice_rows(next, rows);
    s.poa_label = ahead.label();
    if (horizon == 1) {
      const std::size_t last = cur.n_obs() - 1;
      TimeSeriesWindow anchored = slice_rows(cur, std::span<const std::size_t>(&last, 1));
      anchored.window_index = next.window_index;
      anchored.times.push_back(ahead.times[0]);
      Tensor vals(2, cur.n_channels());
      for (std::size_t c = 0; c < cur.n_channels(); ++c) {
        vals(0, c) = anchored.values(0, c);
        vals(1, c) = ahead.values(0, c);
      }
      anchored.values = std::move(vals);
      if (ahead.labeled()) anchored.anomaly_flags.push_back(ahead.anomaly_flags[0]);
      ahead = std::move(anchored);
    }
    s.teacher = std::move(ahead);
    samples.push_back(std::move(s));
  }
  return samples;
}

TimeSeriesWindow drop_observations(const TimeSeriesWindow& window, double ratio,
                                   std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw InputError("drop ratio must lie in [0, 1)");
  const std::size_t n = window.n_obs();
  if (ratio == 0.0) return window;
  // The epsilon absorbs representation error such as (1 - 0.7) * 60 = 18.000000000000004.
  const auto keep = static_cast<std::size_t>(
      std::ceil((1.0 - ratio) * static_cast<double>(n) - 1e-9));
  if (keep < 2) {
    throw InputError("dropping " + std::to_string(ratio) + " of " + std::to_string(n) +
                     " observations leaves fewer than 2");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return slice_rows(window, order);
}

// ---------------------------------------------------------------------------

NormalizationStats fit_normalization(std::span<const RawSequence> train) {
  if (train.empty()) throw InputError("normalization needs at least one training sequence");
  const std::size_t N = train.front().n_channels();
  NormalizationStats stats;
  stats.min.assign(N, std::numeric_limits<double>::infinity());
  stats.max.assign(N, -std::numeric_limits<double>::infinity());
  for (const RawSequence& seq : train) {
    if (seq.n_channels() != N) throw DimensionError("training sequences disagree on channel count");
    for (std::size_t r = 0; r < seq.length(); ++r) {
      for (std::size_t c = 0; c < N; ++c) {
        stats.min[c] = std::min(stats.min[c], seq.values(r, c));
        stats.max[c] = std::max(stats.max[c], seq.values(r, c));
      }
    }
  }
  for (std::size_t c = 0; c < N; ++c) {
    if (!std::isfinite(stats.min[c])) stats.min[c] = stats.max[c] = 0.0;
  }
  return stats;
}

RawSequence apply_normalization(const RawSequence& seq, const NormalizationStats& stats) {
  if (seq.n_channels() != stats.min.size()) {
    throw DimensionError("normalization stats cover " + std::to_string(stats.min.size()) +
                         " channels, sequence has " + std::to_string(seq.n_channels()));
  }
  RawSequence out = seq;
  for (std::size_t r = 0; r < seq.length(); ++r) {
    for (std::size_t c = 0; c < seq.n_channels(); ++c) {
      const double range = stats.max[c] - stats.min[c];
      out.values(r, c) = range > 0.0 ? (seq.values(r, c) - stats.min[c]) / range : 0.5;
    }
  }
  return out;
}

RawSequence denormalize(const RawSequence& seq, const NormalizationStats& stats) {
  RawSequence out = seq;
  for (std::size_t r = 0; r < seq.length(); ++r) {
    for (std::size_t c = 0; c < seq.n_channels(); ++c) {
      const double range = stats.max[c] - stats.min[c];
      out.values(r, c) = range > 0.0 ? stats.min[c] + seq.values(r, c) * range : stats.min[c];
    }
  }
  return out;
}

NormalizedSplits normalize(std::span<const RawSequence> train, std::span<const RawSequence> apply) {
  NormalizedSplits out;
  out.stats = fit_normalization(train);
  for (const auto& s : train) out.train.push_back(apply_normalization(s, out.stats));
  for (const auto& s : apply) out.apply.push_back(apply_normalization(s, out.stats));
  return out;
}

// ---------------------------------------------------------------------------

void SyntheticConfig::validate() const {
  if (length < 2 || n_channels == 0) throw InputError("synthetic length and channels must be positive");
  if (min_len == 0 || min_len > max_len) throw InputError("synthetic needs 0 < min_len <= max_len");
  if (anomaly_ratio < 0.0 || anomaly_ratio >= 1.0) throw InputError("anomaly_ratio must lie in [0, 1)");
  if (anomaly_count == 0) return;
  const std::size_t slot = length / anomaly_count;
  // Each slot hosts ramp + anomaly with a gap longer than the ramp on both sides.
  if (slot < max_len + 2 * precursor_len + 2) {
    throw InputError("infeasible synthetic spacing: " + std::to_string(anomaly_count) +
                     " anomalies of up to " + std::to_string(max_len) + " points with " +
                     std::to_string(precursor_len) + "-point precursors do not fit in " +
                     std::to_string(length) + " observations");
  }
}

namespace {

std::vector<std::size_t> segment_lengths(const SyntheticConfig& cfg, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dist(cfg.min_len, cfg.max_len);
  std::vector<std::size_t> lengths(cfg.anomaly_count);
  for (auto& l : lengths) l = dist(rng);
  if (cfg.anomaly_ratio <= 0.0 || cfg.anomaly_count == 0) return lengths;

  const auto target = static_cast<std::size_t>(
      std::llround(cfg.anomaly_ratio * static_cast<double>(cfg.length)));
  if (target < cfg.anomaly_count * cfg.min_len || target > cfg.anomaly_count * cfg.max_len) {
    throw InputError("anomaly_ratio cannot be met with the configured count and length range");
  }
  // Scale towards the target, then settle the remainder one point at a time.
  const double total = static_cast<double>(std::accumulate(lengths.begin(), lengths.end(), std::size_t{0}));
  for (auto& l : lengths) {
    const double scaled = static_cast<double>(l) * static_cast<double>(target) / total;
    l = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(scaled)), cfg.min_len, cfg.max_len);
  }
  std::size_t sum = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
  for (std::size_t i = 0; sum != target; i = (i + 1) % lengths.size()) {
    if (sum < target && lengths[i] < cfg.max_len) {
      ++lengths[i];
      ++sum;
    } else if (sum > target && lengths[i] > cfg.min_len) {
      --lengths[i];
      --sum;
    }
  }
  return lengths;
}

}  // namespace

SyntheticSequence generate_synthetic_detailed(const SyntheticConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const std::size_t T = cfg.length, N = cfg.n_channels;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  constexpr double kRampHeight = 0.5;
  constexpr double kLevelShift = 1.0;
  constexpr double kBurstAmplitude = 0.8;
  constexpr double kBurstPeriod = 8.0;
  constexpr double kNoise = 0.02;

  std::uniform_real_distribution<double> period(250.0, 500.0), phase(0.0, kTwoPi),
      amplitude(0.2, 0.4);
  std::vector<double> periods(N), phases(N), amps(N);
  for (std::size_t c = 0; c < N; ++c) {
    periods[c] = period(rng);
    phases[c] = phase(rng);
    amps[c] = amplitude(rng);
  }

  SyntheticSequence out;
  RawSequence& seq = out.sequence;
  seq.source_name = "synthetic";
  seq.times.resize(T);
  seq.values = Tensor(T, N);
  seq.anomaly_flags.assign(T, false);
  for (std::size_t c = 0; c < N; ++c) seq.channel_names.push_back("ch" + std::to_string(c));

  std::normal_distribution<double> noise(0.0, kNoise);
  for (std::size_t i = 0; i < T; ++i) {
    seq.times[i] = static_cast<double>(i);
    for (std::size_t c = 0; c < N; ++c) {
      seq.values(i, c) = 0.5 + amps[c] * std::sin(kTwoPi * static_cast<double>(i) / periods[c] + phases[c]) +
                         noise(rng);
    }
  }

  const std::vector<std::size_t> lengths = segment_lengths(cfg, rng);
  const std::size_t slot = cfg.anomaly_count ? T / cfg.anomaly_count : T;
  std::bernoulli_distribution kind(0.5);
  for (std::size_t k = 0; k < cfg.anomaly_count; ++k) {
    const std::size_t len = lengths[k];
    const std::size_t lo = k * slot + cfg.precursor_len + 1;
    const std::size_t hi = (k + 1) * slot - len - 1;
    const std::size_t start = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    const bool level = kind(rng);
    out.anomalies.push_back({start, len, level});

    for (std::size_t j = 0; j < cfg.precursor_len; ++j) {
      const std::size_t i = start - cfg.precursor_len + j;
      const double offset = kRampHeight * static_cast<double>(j + 1) / static_cast<double>(cfg.precursor_len);
      for (std::size_t c = 0; c < N; ++c) seq.values(i, c) += offset;
    }
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t i = start + j;
      const double offset =
          kRampHeight + (level ? kLevelShift
                               : kBurstAmplitude * std::sin(kTwoPi * static_cast<double>(j) / kBurstPeriod));
      for (std::size_t c = 0; c < N; ++c) seq.values(i, c) += offset;
      seq.anomaly_flags[i] = true;
    }
  }
  return out;
}

RawSequence generate_synthetic(const SyntheticConfig& config) {
  return generate_synthetic_detailed(config).sequence;
}

std::pair<RawSequence, RawSequence> split_sequence(const RawSequence& seq, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0, 1)");
  const auto cut = static_cast<std::size_t>(fraction * static_cast<double>(seq.length()));
  auto take = [&](std::size_t from, std::size_t to) {
    RawSequence part;
    part.channel_names = seq.channel_names;
    part.source_name = seq.source_name;
    part.times.assign(seq.times.begin() + static_cast<std::ptrdiff_t>(from),
                      seq.times.begin() + static_cast<std::ptrdiff_t>(to));
    part.values = Tensor(to - from, seq.n_channels());
    for (std::size_t r = from; r < to; ++r)
      for (std::size_t c = 0; c < seq.n_channels(); ++c) part.values(r - from, c) = seq.values(r, c);
    if (seq.labeled()) {
      part.anomaly_flags.assign(seq.anomaly_flags.begin() + static_cast<std::ptrdiff_t>(from),
                                seq.anomaly_flags.begin() + static_cast<std::ptrdiff_t>(to));
    }
    return part;
  };
  return {take(0, cut), take(cut, seq.length())};
}

// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

double parse_number(std::string_view cell, std::size_t line) {
  double v = 0.0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v)) {
    throw ParseError("non-numeric cell '" + std::string(cell) + "'", line);
  }
  return v;
}

void append_number(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

RawSequence parse_csv(std::string_view text, const std::string& source_name) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    lines.push_back(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("missing header row", 1);

  const auto header = split_fields(lines[0]);
  std::ptrdiff_t time_col = -1, label_col = -1;
  RawSequence seq;
  seq.source_name = source_name;
  std::vector<std::size_t> value_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].empty()) throw ParseError("empty column name", 1);
    if (header[i] == "timestamp") {
      time_col = static_cast<std::ptrdiff_t>(i);
    } else if (header[i] == "label") {
      label_col = static_cast<std::ptrdiff_t>(i);
    } else {
      value_cols.push_back(i);
      seq.channel_names.emplace_back(header[i]);
    }
  }
  if (value_cols.empty()) throw ParseError("no value columns", 1);

  const std::size_t rows = lines.size() - 1;
  seq.values = Tensor(rows, value_cols.size());
  seq.times.reserve(rows);
  if (label_col >= 0) seq.anomaly_flags.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t line_no = r + 2;
    const auto cells = split_fields(lines[r + 1]);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                       std::to_string(cells.size()),
                       line_no);
    }
    for (std::size_t k = 0; k < value_cols.size(); ++k) {
      seq.values(r, k) = parse_number(cells[value_cols[k]], line_no);
    }
    const double t = time_col >= 0 ? parse_number(cells[static_cast<std::size_t>(time_col)], line_no)
                                   : static_cast<double>(r);
    if (!seq.times.empty() && !(t > seq.times.back())) {
      throw ParseError("timestamps must be strictly increasing", line_no);
    }
    seq.times.push_back(t);
    if (label_col >= 0) {
      const std::string_view cell = cells[static_cast<std::size_t>(label_col)];
      if (cell != "0" && cell != "1") throw ParseError("label must be 0 or 1, got '" + std::string(cell) + "'", line_no);
      seq.anomaly_flags.push_back(cell == "1");
    }
  }
  return seq;
}

RawSequence load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

std::string format_csv(const RawSequence& seq) {
  validate_sequence(seq);
  std::string out = "timestamp";
  for (std::size_t c = 0; c < seq.n_channels(); ++c) {
    out += ',';
    out += c < seq.channel_names.size() ? seq.channel_names[c] : "ch" + std::to_string(c);
  }
  if (seq.labeled()) out += ",label";
  out += '\n';
  for (std::size_t r = 0; r < seq.length(); ++r) {
    append_number(out, seq.times[r]);
    for (std::size_t c = 0; c < seq.n_channels(); ++c) {
      out += ',';
      append_number(out, seq.values(r, c));
    }
    if (seq.labeled()) out += seq.anomaly_flags[r] ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

void save_csv(const RawSequence& seq, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << format_csv(seq);
}

}  // namespace pad
