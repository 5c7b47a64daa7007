#include "irsbf/sampling.hpp"

#include <cmath>
#include <iomanip>
#include <random>

#include "irsbf/errors.hpp"

namespace irsbf {

PhaseConfig ConfigMatrix::config(std::size_t t) const {
  const auto r = row(t);
  return PhaseConfig{levels_, std::vector<int>(r.begin(), r.end())};
}

void ConfigMatrix::push_back(const PhaseConfig& config) {
  if (rows_ == 0) {
    cols_ = config.size();
    levels_ = config.levels;
  } else if (config.size() != cols_ || config.levels != levels_) {
    throw DimensionError("configuration does not match the matrix shape");
  }
  data_.insert(data_.end(), config.k.begin(), config.k.end());
  ++rows_;
}

void draw_row(const RandomStream& stream, std::size_t t, int K, std::span<int> row) {
  auto engine = stream.child(t).engine();
  std::uniform_int_distribution<int> level(1, K);
  for (int& k : row) k = level(engine);
}

ConfigMatrix draw_samples(std::size_t N, const Codebook& codebook, std::size_t T, const RandomStream& stream) {
  if (T == 0) throw InvalidParameter("need at least one random sample");
  if (N == 0) throw InvalidParameter("need at least one reflective element");
  ConfigMatrix configs(T, N, codebook.levels());
  for (std::size_t t = 0; t < T; ++t) draw_row(stream, t, codebook.levels(), configs.row(t));
  return configs;
}

SignalModel::SignalModel(const ChannelInstance& channel, const Codebook& codebook, double tx_power,
                         double noise_power, SimulationOptions options)
    : elements_(channel.size()),
      codebook_(codebook),
      h0_(channel.h0()),
      rotated_(rotated_channels(channel, codebook)),
      amplitude_(std::sqrt(tx_power)),
      noise_power_(noise_power),
      options_(options) {
  if (!(tx_power >= 0.0) || !(noise_power >= 0.0)) throw InvalidParameter("powers must be nonnegative");
}

Complex SignalModel::channel_gain(std::span<const int> row) const {
  if (row.size() != elements_) throw DimensionError("sample row length does not match the channel");
  const auto K = static_cast<std::size_t>(codebook_.levels());
  Complex g = h0_;
  for (std::size_t n = 0; n < elements_; ++n) g += rotated_[n * K + static_cast<std::size_t>(row[n] - 1)];
  return g;
}

Complex SignalModel::measure(std::span<const int> row, const RandomStream& noise_stream, std::size_t t) const {
  const Complex g = channel_gain(row);
  auto engine = noise_stream.child(t).engine();
  Complex pilot(amplitude_, 0.0);
  if (!options_.common_symbol) pilot = std::polar(amplitude_, uniform_angle(engine));
  Complex y = g * pilot;
  if (noise_power_ > 0.0) y += complex_gaussian(engine, noise_power_);
  return y;
}

SampleDataset simulate_dataset(const ChannelInstance& channel, ConfigMatrix configs, double tx_power,
                               double noise_power, const RandomStream& noise_stream, SimulationOptions options) {
  if (configs.rows() == 0) throw InvalidParameter("dataset needs at least one sample");
  if (configs.cols() != channel.size()) throw DimensionError("configurations do not match the channel size");
  const Codebook codebook(configs.levels());
  const SignalModel model(channel, codebook, tx_power, noise_power, options);

  SampleDataset out;
  out.tx_power = tx_power;
  out.noise_power = noise_power;
  out.codebook = codebook;
  out.common_symbol = options.common_symbol;
  out.powers.resize(configs.rows());
  if (options.complex_mode) out.signals.emplace(configs.rows());
  for (std::size_t t = 0; t < configs.rows(); ++t) {
    const Complex y = model.measure(configs.row(t), noise_stream, t);
    out.powers[t] = std::norm(y);
    if (out.signals) (*out.signals)[t] = y;
  }
  out.configs = std::move(configs);
  return out;
}

void write_dataset_csv(const SampleDataset& dataset, std::ostream& out) {
  const auto N = dataset.configs.cols();
  out << "t";
  for (std::size_t n = 1; n <= N; ++n) out << ",k_" << n;
  out << ",power,re_y,im_y\n";
  out << std::setprecision(12);
  for (std::size_t t = 0; t < dataset.size(); ++t) {
    out << t + 1;
    for (int k : dataset.configs.row(t)) out << ',' << k;
    out << ',' << dataset.powers[t];
    if (dataset.signals) {
      const Complex y = (*dataset.signals)[t];
      out << ',' << y.real() << ',' << y.imag() << '\n';
    } else {
      out << ",,\n";
    }
  }
}

std::size_t ConditionalStats::empty_buckets() const {
  std::size_t empty = 0;
  for (auto c : bucket_size) empty += (c == 0);
  return empty;
}

ConditionalAccumulator::ConditionalAccumulator(std::size_t elements, int levels, bool track_signal)
    : elements_(elements),
      levels_(levels),
      track_signal_(track_signal),
      count_(elements * static_cast<std::size_t>(levels), 0),
      sum_(elements * static_cast<std::size_t>(levels), 0.0) {
  if (track_signal_) signal_sum_.assign(count_.size(), Complex{});
}

void ConditionalAccumulator::add(std::span<const int> row, double value) {
  if (row.size() != elements_) throw DimensionError("sample row length does not match the accumulator");
  const auto K = static_cast<std::size_t>(levels_);
  for (std::size_t n = 0; n < elements_; ++n) {
    const std::size_t i = n * K + static_cast<std::size_t>(row[n] - 1);
    ++count_[i];
    sum_[i] += value;
  }
  total_ += value;
  ++samples_;
}

void ConditionalAccumulator::add(std::span<const int> row, double value, Complex signal) {
  add(row, value);
  if (!track_signal_) return;
  const auto K = static_cast<std::size_t>(levels_);
  for (std::size_t n = 0; n < elements_; ++n) signal_sum_[n * K + static_cast<std::size_t>(row[n] - 1)] += signal;
  total_signal_ += signal;
}

ConditionalStats ConditionalAccumulator::finish() const {
  if (samples_ == 0) throw InsufficientSamples("no samples accumulated");
  ConditionalStats stats;
  stats.elements = elements_;
  stats.levels = levels_;
  stats.samples = samples_;
  stats.bucket_size = count_;
  stats.grand_mean_power = total_ / static_cast<double>(samples_);
  stats.cond_mean_power.assign(count_.size(), 0.0);
  stats.centered.assign(count_.size(), 0.0);
  if (track_signal_) {
    stats.cond_mean_signal.emplace(count_.size(), Complex{});
    stats.grand_mean_signal = total_signal_ / static_cast<double>(samples_);
  }
  for (std::size_t i = 0; i < count_.size(); ++i) {
    if (count_[i] == 0) continue;
    const auto c = static_cast<double>(count_[i]);
    stats.cond_mean_power[i] = sum_[i] / c;
    stats.centered[i] = stats.cond_mean_power[i] - stats.grand_mean_power;
    if (track_signal_) (*stats.cond_mean_signal)[i] = signal_sum_[i] / c;
  }
  return stats;
}

ConditionalStats conditional_stats(const SampleDataset& dataset) {
  if (dataset.size() == 0) throw InsufficientSamples("empty dataset");
  ConditionalAccumulator acc(dataset.configs.cols(), dataset.configs.levels(), dataset.signals.has_value());
  for (std::size_t t = 0; t < dataset.size(); ++t) {
    if (dataset.signals) {
      acc.add(dataset.configs.row(t), dataset.powers[t], (*dataset.signals)[t]);
    } else {
      acc.add(dataset.configs.row(t), dataset.powers[t]);
    }
  }
  return acc.finish();
}

ConditionalStats exact_conditional_stats(const ChannelInstance& channel, const Codebook& codebook, double tx_power,
                                         double noise_power) {
  const std::size_t N = channel.size();
  const int K = codebook.levels();
  const auto cells = N * static_cast<std::size_t>(K);
  const auto rotated = rotated_channels(channel, codebook);
  const double amplitude = std::sqrt(tx_power);

  double reflected_power = 0.0;
  for (double b : channel.betas()) reflected_power += b * b;

  ConditionalStats stats;
  stats.elements = N;
  stats.levels = K;
  stats.samples = static_cast<std::size_t>(K);
  stats.bucket_size.assign(cells, 1);
  stats.cond_mean_power.resize(cells);
  stats.centered.resize(cells);
  stats.cond_mean_signal.emplace(cells);
  stats.grand_mean_power = tx_power * (channel.beta0() * channel.beta0() + reflected_power) + noise_power;
  stats.grand_mean_signal = amplitude * channel.h0();
  for (std::size_t i = 0; i < cells; ++i) {
    // E|Y|^2 given theta_n differs from the grand mean only by the h0/h_n cross term.
    const double cross = 2.0 * tx_power * (std::conj(channel.h0()) * rotated[i]).real();
    stats.centered[i] = cross;
    stats.cond_mean_power[i] = stats.grand_mean_power + cross;
    (*stats.cond_mean_signal)[i] = amplitude * (channel.h0() + rotated[i]);
  }
  return stats;
}

CandidateEvaluator noiseless_evaluator(const ChannelInstance& channel, double tx_power) {
  return [channel, tx_power](const PhaseConfig& config, std::size_t) {
    return tx_power * std::norm(superposition(channel, config));
  };
}

CandidateEvaluator probe_evaluator(const ChannelInstance& channel, double tx_power, double noise_power,
                                   std::size_t probes, const RandomStream& stream) {
  if (probes == 0) throw InvalidParameter("probe evaluator needs at least one measurement");
  return [channel, tx_power, noise_power, probes, stream](const PhaseConfig& config, std::size_t candidate) {
    const SignalModel model(channel, Codebook(config.levels), tx_power, noise_power, SimulationOptions{});
    const RandomStream calls = stream.child(candidate);
    double sum = 0.0;
    for (std::size_t m = 0; m < probes; ++m) sum += std::norm(model.measure(config.k, calls, m));
    return sum / static_cast<double>(probes);
  };
}

}  // namespace irsbf
