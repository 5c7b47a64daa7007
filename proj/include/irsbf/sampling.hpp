#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "irsbf/core_model.hpp"
#include "irsbf/random.hpp"

namespace irsbf {

/// T configurations over N elements stored row-major, one row per sample.
class ConfigMatrix {
 public:
  ConfigMatrix() = default;
  ConfigMatrix(std::size_t rows, std::size_t cols, int levels)
      : rows_(rows), cols_(cols), levels_(levels), data_(rows * cols, levels) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  int levels() const noexcept { return levels_; }

  std::span<const int> row(std::size_t t) const { return {data_.data() + t * cols_, cols_}; }
  std::span<int> row(std::size_t t) { return {data_.data() + t * cols_, cols_}; }
  PhaseConfig config(std::size_t t) const;

  /// Appends `config` as a new last row; the first push fixes N and K.
  void push_back(const PhaseConfig& config);

  bool operator==(const ConfigMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  int levels_ = 2;
  std::vector<int> data_;
};

/// Fills `row` with i.i.d. uniform indices in {1..K} from the row's own substream.
void draw_row(const RandomStream& stream, std::size_t t, int K, std::span<int> row);

/// T uniform random configurations; row t depends only on (stream, t).
ConfigMatrix draw_samples(std::size_t N, const Codebook& codebook, std::size_t T, const RandomStream& stream);

struct SimulationOptions {
  bool complex_mode = false;   // record Y_t as well as |Y_t|^2
  bool common_symbol = true;   // X_t = sqrt(P); otherwise sqrt(P) e^{j psi_t}
};

struct SampleDataset {
  ConfigMatrix configs;
  std::vector<double> powers;                   // |Y_t|^2 in watts
  std::optional<std::vector<Complex>> signals;  // Y_t, complex mode only
  double tx_power = 0.0;
  double noise_power = 0.0;
  Codebook codebook{2};
  bool common_symbol = true;

  std::size_t size() const noexcept { return powers.size(); }
};

/// Received-signal model Y = g X + Z for one channel. Measurement t draws its
/// pilot phase and noise from noise-stream child t only.
class SignalModel {
 public:
  SignalModel(const ChannelInstance& channel, const Codebook& codebook, double tx_power, double noise_power,
              SimulationOptions options);

  std::size_t elements() const noexcept { return elements_; }
  const Codebook& codebook() const noexcept { return codebook_; }

  Complex channel_gain(std::span<const int> row) const;
  Complex measure(std::span<const int> row, const RandomStream& noise_stream, std::size_t t) const;

 private:
  std::size_t elements_;
  Codebook codebook_;
  Complex h0_;
  std::vector<Complex> rotated_;
  double amplitude_;
  double noise_power_;
  SimulationOptions options_;
};

/// Generates T random samples and hands each (t, row, Y_t) to `visit` without storing them.
template <typename Visitor>
void stream_samples(const SignalModel& model, std::size_t T, const RandomStream& sample_stream,
                    const RandomStream& noise_stream, Visitor&& visit) {
  std::vector<int> row(model.elements());
  for (std::size_t t = 0; t < T; ++t) {
    draw_row(sample_stream, t, model.codebook().levels(), row);
    const Complex y = model.measure(row, noise_stream, t);
    visit(t, std::span<const int>(row), y);
  }
}

SampleDataset simulate_dataset(const ChannelInstance& channel, ConfigMatrix configs, double tx_power,
                               double noise_power, const RandomStream& noise_stream, SimulationOptions options);

/// Columns t,k_1..k_N,power,re_y,im_y; complex columns blank without signals.
void write_dataset_csv(const SampleDataset& dataset, std::ostream& out);

/// Per-(element, level) conditional statistics. Element n is 0-based; level k is 1-based.
struct ConditionalStats {
  std::size_t elements = 0;
  int levels = 2;
  std::size_t samples = 0;
  std::vector<std::size_t> bucket_size;  // |Q_nk|
  std::vector<double> cond_mean_power;   // 0 for empty buckets
  std::vector<double> centered;          // cond mean minus grand mean; 0 for empty buckets
  std::optional<std::vector<Complex>> cond_mean_signal;
  double grand_mean_power = 0.0;
  std::optional<Complex> grand_mean_signal;

  std::size_t index(std::size_t n, int k) const noexcept {
    return n * static_cast<std::size_t>(levels) + static_cast<std::size_t>(k - 1);
  }
  bool valid(std::size_t n, int k) const { return bucket_size.at(index(n, k)) > 0; }
  double mean(std::size_t n, int k) const { return cond_mean_power.at(index(n, k)); }
  double centered_at(std::size_t n, int k) const { return centered.at(index(n, k)); }
  std::size_t empty_buckets() const;
};

/// Streaming accumulator behind conditional_stats; usable without materializing a dataset.
class ConditionalAccumulator {
 public:
  ConditionalAccumulator(std::size_t elements, int levels, bool track_signal);

  void add(std::span<const int> row, double value);
  void add(std::span<const int> row, double value, Complex signal);

  std::size_t samples() const noexcept { return samples_; }
  ConditionalStats finish() const;

 private:
  std::size_t elements_;
  int levels_;
  bool track_signal_;
  std::size_t samples_ = 0;
  double total_ = 0.0;
  Complex total_signal_{};
  std::vector<std::size_t> count_;
  std::vector<double> sum_;
  std::vector<Complex> signal_sum_;
};

ConditionalStats conditional_stats(const SampleDataset& dataset);

/// Population statistics in the T -> infinity limit (noiseless evaluation):
/// E[|Y|^2 | theta_n = kw] and E[Y | theta_n = kw] under a common real pilot.
ConditionalStats exact_conditional_stats(const ChannelInstance& channel, const Codebook& codebook, double tx_power,
                                         double noise_power);

/// Estimates E[|Y|^2 | theta = config]. `candidate` distinguishes successive
/// calls so that probe noise is a pure function of the call site.
using CandidateEvaluator = std::function<double(const PhaseConfig& config, std::size_t candidate)>;

/// Exact received power P |g|^2.
CandidateEvaluator noiseless_evaluator(const ChannelInstance& channel, double tx_power);

/// Mean of `probes` fresh measurements of the configuration.
CandidateEvaluator probe_evaluator(const ChannelInstance& channel, double tx_power, double noise_power,
                                   std::size_t probes, const RandomStream& stream);

}  // namespace irsbf
