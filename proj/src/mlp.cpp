#include "latrack/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

namespace latrack {

namespace {

std::string layer_name(std::size_t index) { return "layer " + std::to_string(index); }

double smooth_l1_grad(double error, double beta) {
  if (std::abs(error) < beta) return error / beta;
  return error > 0.0 ? 1.0 : -1.0;
}

}  // namespace

MlpModel MlpModel::init(int input_dim, const std::vector<int>& hidden, std::uint64_t seed) {
  if (input_dim <= 0) throw std::invalid_argument("input_dim must be positive");
  for (int width : hidden) {
    if (width <= 0) throw std::invalid_argument("hidden layer widths must be positive");
  }

  MlpModel model;
  model.input_dim = input_dim;

  std::vector<int> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);

  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> uniform(-limit, limit);

    Eigen::MatrixXd w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i) {
      for (int j = 0; j < fan_in; ++j) w(i, j) = uniform(rng);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return model;
}

std::vector<int> MlpModel::hidden_widths() const {
  std::vector<int> widths;
  for (std::size_t l = 0; l + 1 < weights.size(); ++l) {
    widths.push_back(static_cast<int>(weights[l].rows()));
  }
  return widths;
}

long MlpModel::parameter_count() const {
  long count = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    count += weights[l].size() + biases[l].size();
  }
  return count;
}

void MlpModel::validate() const {
  if (input_dim <= 0) throw std::invalid_argument("model input_dim must be positive");
  if (weights.empty() || weights.size() != biases.size()) {
    throw std::invalid_argument("model has no parameter layers");
  }
  long expected_in = input_dim;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].cols() != expected_in) {
      throw std::invalid_argument(layer_name(l) + " expects " + std::to_string(weights[l].cols()) +
                                  " inputs, previous layer provides " + std::to_string(expected_in));
    }
    if (biases[l].size() != weights[l].rows()) {
      throw std::invalid_argument(layer_name(l) + " bias size does not match its width");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw std::invalid_argument(layer_name(l) + " holds non-finite parameters");
    }
    expected_in = weights[l].rows();
  }
  if (expected_in != 1) {
    throw std::invalid_argument("output layer must have exactly one unit");
  }
}

Eigen::VectorXd forward(const MlpModel& model, const Eigen::MatrixXd& batch) {
  if (batch.cols() != model.input_dim) {
    throw std::invalid_argument("forward: batch has " + std::to_string(batch.cols()) +
                                " columns, model expects " + std::to_string(model.input_dim));
  }
  if (batch.rows() == 0) return Eigen::VectorXd();

  Eigen::MatrixXd activation = batch;
  const std::size_t layers = model.weights.size();
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    activation = ((activation * model.weights[l].transpose()).rowwise() +
                  model.biases[l].transpose())
                     .cwiseMax(0.0);
  }
  Eigen::VectorXd out = activation * model.weights[layers - 1].transpose().col(0);
  out.array() += model.biases[layers - 1](0);
  return out.array().tanh();
}

double smooth_l1(double prediction, double target, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("smooth_l1: beta must be positive");
  const double e = std::abs(prediction - target);
  if (e < beta) return 0.5 * e * e / beta;
  return e - 0.5 * beta;
}

Gradients backward(const MlpModel& model, const Eigen::MatrixXd& batch,
                   const Eigen::VectorXd& targets, double beta) {
  if (batch.rows() != targets.size()) {
    throw std::invalid_argument("backward: batch and target sizes differ");
  }
  if (batch.cols() != model.input_dim) {
    throw std::invalid_argument("backward: batch width does not match model input");
  }
  if (batch.rows() == 0) throw std::invalid_argument("backward: empty batch");

  const std::size_t layers = model.weights.size();
  const long m = batch.rows();

  // Forward pass keeping every activation; activations[l] feeds layer l.
  std::vector<Eigen::MatrixXd> activations;
  activations.reserve(layers);
  activations.push_back(batch);
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    activations.push_back(((activations[l] * model.weights[l].transpose()).rowwise() +
                           model.biases[l].transpose())
                              .cwiseMax(0.0));
  }
  Eigen::VectorXd z_out = activations[layers - 1] * model.weights[layers - 1].transpose().col(0);
  z_out.array() += model.biases[layers - 1](0);
  const Eigen::ArrayXd y = z_out.array().tanh();

  Gradients grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);

  const Eigen::ArrayXd errors = y - targets.array();
  double loss = 0.0;
  Eigen::ArrayXd dloss(m);
  for (long i = 0; i < m; ++i) {
    loss += smooth_l1(y(i), targets(i), beta);
    dloss(i) = smooth_l1_grad(errors(i), beta) / static_cast<double>(m);
  }
  grads.mean_loss = loss / static_cast<double>(m);

  // Output unit: d tanh = 1 - y^2.
  Eigen::MatrixXd delta = (dloss * (1.0 - y.square())).matrix();
  for (std::size_t l = layers; l-- > 0;) {
    grads.weights[l] = delta.transpose() * activations[l];
    grads.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = (delta * model.weights[l]).cwiseProduct(
          (activations[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

std::vector<double> train(MlpModel& model, const LabeledDataset& data, const TrainConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (data.dim() != model.input_dim) {
    throw std::invalid_argument("train: dataset dimension does not match model input");
  }
  if (data.features.rows() != data.labels.size()) {
    throw std::invalid_argument("train: feature and label counts differ");
  }
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("train: negative learning rate");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) {
    throw std::invalid_argument("train: momentum must lie in [0, 1)");
  }

  const long n = data.size();
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0L);
  std::mt19937_64 rng(cfg.seed);

  std::vector<Eigen::MatrixXd> vel_w;
  std::vector<Eigen::VectorXd> vel_b;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    vel_w.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    vel_b.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }

  std::vector<double> trace;
  trace.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (long start = 0; start < n; start += cfg.batch_size) {
      const long count = std::min<long>(cfg.batch_size, n - start);
      Eigen::MatrixXd batch(count, data.dim());
      Eigen::VectorXd targets(count);
      for (long i = 0; i < count; ++i) {
        batch.row(i) = data.features.row(order[start + i]);
        targets(i) = data.labels(order[start + i]);
      }

      const Gradients grads = backward(model, batch, targets, cfg.smooth_l1_beta);
      if (!std::isfinite(grads.mean_loss)) {
        throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += grads.mean_loss * static_cast<double>(count);

      for (std::size_t l = 0; l < model.weights.size(); ++l) {
        vel_w[l] = cfg.momentum * vel_w[l] + grads.weights[l];
        vel_b[l] = cfg.momentum * vel_b[l] + grads.biases[l];
        model.weights[l] -= cfg.learning_rate * vel_w[l];
        model.biases[l] -= cfg.learning_rate * vel_b[l];
      }
    }
    trace.push_back(epoch_loss / static_cast<double>(n));
  }
  return trace;
}

double mse(const MlpModel& model, const LabeledDataset& data) {
  if (data.size() == 0) throw std::invalid_argument("mse: empty dataset");
  const Eigen::VectorXd predictions = forward(model, data.features);
  return (predictions - data.labels).squaredNorm() / static_cast<double>(data.size());
}

GridSearchResult grid_search_cv(const LabeledDataset& data,
                                const std::vector<std::vector<int>>& grid,
                                int folds, const TrainConfig& cfg) {
  if (grid.empty()) throw std::invalid_argument("grid_search_cv: empty grid");
  if (folds < 2) throw std::invalid_argument("grid_search_cv: need at least 2 folds");
  if (data.size() < folds) throw std::invalid_argument("grid_search_cv: fewer examples than folds");

  const long n = data.size();
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0L);
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(order.begin(), order.end(), rng);

  // Fold f covers order[f*n/k, (f+1)*n/k): disjoint and exhaustive.
  const auto fold_begin = [&](int f) { return static_cast<long>(f) * n / folds; };

  GridSearchResult result;
  result.cell_mse.resize(grid.size());
  long best_params = 0;
  bool have_best = false;

  for (std::size_t cell = 0; cell < grid.size(); ++cell) {
    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
      const long lo = fold_begin(f);
      const long hi = fold_begin(f + 1);

      LabeledDataset train_part;
      train_part.features.resize(n - (hi - lo), data.dim());
      train_part.labels.resize(n - (hi - lo));
      LabeledDataset val_part;
      val_part.features.resize(hi - lo, data.dim());
      val_part.labels.resize(hi - lo);

      long ti = 0;
      for (long i = 0; i < n; ++i) {
        if (i >= lo && i < hi) {
          val_part.features.row(i - lo) = data.features.row(order[i]);
          val_part.labels(i - lo) = data.labels(order[i]);
        } else {
          train_part.features.row(ti) = data.features.row(order[i]);
          train_part.labels(ti) = data.labels(order[i]);
          ++ti;
        }
      }

      TrainConfig fold_cfg = cfg;
      fold_cfg.seed = cfg.seed + 1000003ULL * (cell + 1) + static_cast<std::uint64_t>(f);
      MlpModel model = MlpModel::init(data.dim(), grid[cell], fold_cfg.seed);
      train(model, train_part, fold_cfg);
      total += mse(model, val_part);
    }
    result.cell_mse[cell] = total / folds;

    MlpModel probe = MlpModel::init(data.dim(), grid[cell], 0);
    const long params = probe.parameter_count();
    const bool better = !have_best || result.cell_mse[cell] < result.cell_mse[result.best_index] ||
                        (result.cell_mse[cell] == result.cell_mse[result.best_index] &&
                         params < best_params);
    if (better) {
      have_best = true;
      result.best_index = cell;
      result.best_hidden = grid[cell];
      best_params = params;
    }
  }
  return result;
}

namespace {

constexpr char kModelMagic[8] = {'L', 'A', 'T', 'R', 'K', 'M', 'L', 'P'};
constexpr std::uint32_t kModelVersion = 1;
constexpr std::uint32_t kMaxLayerWidth = 1u << 20;

void write_bytes(std::ofstream& out, const void* data, std::size_t size) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void read_bytes(std::ifstream& in, void* data, std::size_t size, std::size_t& offset) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (in.gcount() != static_cast<std::streamsize>(size)) {
    throw std::runtime_error("model file parse error at byte " + std::to_string(offset) +
                             ": unexpected end of file");
  }
  offset += size;
}

}  // namespace

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  model.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");

  write_bytes(out, kModelMagic, sizeof(kModelMagic));
  write_bytes(out, &kModelVersion, sizeof(kModelVersion));
  const std::uint32_t input_dim = static_cast<std::uint32_t>(model.input_dim);
  write_bytes(out, &input_dim, sizeof(input_dim));
  const std::vector<int> hidden = model.hidden_widths();
  const std::uint32_t hidden_count = static_cast<std::uint32_t>(hidden.size());
  write_bytes(out, &hidden_count, sizeof(hidden_count));
  for (int width : hidden) {
    const std::uint32_t w = static_cast<std::uint32_t>(width);
    write_bytes(out, &w, sizeof(w));
  }
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    for (long i = 0; i < model.weights[l].rows(); ++i) {
      for (long j = 0; j < model.weights[l].cols(); ++j) {
        const double v = model.weights[l](i, j);
        write_bytes(out, &v, sizeof(v));
      }
    }
    for (long i = 0; i < model.biases[l].size(); ++i) {
      const double v = model.biases[l](i);
      write_bytes(out, &v, sizeof(v));
    }
  }
  if (!out) throw std::runtime_error("failed while writing " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::size_t offset = 0;
  char magic[8];
  read_bytes(in, magic, sizeof(magic), offset);
  if (std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("model file parse error at byte 0: bad magic");
  }
  std::uint32_t version = 0;
  read_bytes(in, &version, sizeof(version), offset);
  if (version != kModelVersion) {
    throw std::runtime_error("unsupported model file version " + std::to_string(version));
  }
  std::uint32_t input_dim = 0;
  read_bytes(in, &input_dim, sizeof(input_dim), offset);
  std::uint32_t hidden_count = 0;
  read_bytes(in, &hidden_count, sizeof(hidden_count), offset);
  if (input_dim == 0 || input_dim > kMaxLayerWidth) {
    throw std::invalid_argument("model file validation error: input layer width " +
                                std::to_string(input_dim));
  }
  if (hidden_count > 64) {
    throw std::invalid_argument("model file validation error: implausible hidden layer count");
  }

  std::vector<int> dims;
  dims.push_back(static_cast<int>(input_dim));
  for (std::uint32_t l = 0; l < hidden_count; ++l) {
    std::uint32_t width = 0;
    read_bytes(in, &width, sizeof(width), offset);
    if (width == 0 || width > kMaxLayerWidth) {
      throw std::invalid_argument("model file validation error: layer " + std::to_string(l + 1) +
                                  " width " + std::to_string(width));
    }
    dims.push_back(static_cast<int>(width));
  }
  dims.push_back(1);

  MlpModel model;
  model.input_dim = static_cast<int>(input_dim);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Eigen::MatrixXd w(dims[l + 1], dims[l]);
    for (long i = 0; i < w.rows(); ++i) {
      for (long j = 0; j < w.cols(); ++j) {
        double v = 0.0;
        read_bytes(in, &v, sizeof(v), offset);
        w(i, j) = v;
      }
    }
    Eigen::VectorXd b(dims[l + 1]);
    for (long i = 0; i < b.size(); ++i) {
      double v = 0.0;
      read_bytes(in, &v, sizeof(v), offset);
      b(i) = v;
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }

  char extra = 0;
  in.read(&extra, 1);
  if (in.gcount() != 0) {
    throw std::runtime_error("model file parse error at byte " + std::to_string(offset) +
                             ": trailing data");
  }
  model.validate();
  return model;
}

}  // namespace latrack
