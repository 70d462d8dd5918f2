#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace latrack {

/// Fully connected regressor: ReLU hidden layers, tanh output, one output
/// unit. Weight matrices are (out x in); evaluating layer l on a batch A
/// (rows = examples) is A * W_l^T + b_l^T.
struct MlpModel {
  int input_dim = 0;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  /// Fresh model with uniform +-sqrt(6/(fan_in+fan_out)) weights and zero
  /// biases, reproducible from the seed. `hidden` may be empty for a
  /// plain linear-plus-tanh model.
  static MlpModel init(int input_dim, const std::vector<int>& hidden, std::uint64_t seed);

  std::vector<int> hidden_widths() const;
  int layer_count() const { return static_cast<int>(weights.size()); }
  long parameter_count() const;

  /// Checks that layer shapes chain from input_dim to one output and that
  /// every parameter is finite. Throws std::invalid_argument naming the
  /// offending layer.
  void validate() const;
};

/// Batched forward pass: batch is (M x input_dim), result is M costs in
/// [-1, 1]. Throws on column-count mismatch.
Eigen::VectorXd forward(const MlpModel& model, const Eigen::MatrixXd& batch);

/// Huber-style loss on the error e = prediction - target: quadratic
/// 0.5 e^2 / beta inside |e| < beta, linear |e| - 0.5 beta outside.
double smooth_l1(double prediction, double target, double beta);

/// Feature rows with one regression target each.
struct LabeledDataset {
  Eigen::MatrixXd features;  // N x dim
  Eigen::VectorXd labels;    // N

  long size() const { return features.rows(); }
  int dim() const { return static_cast<int>(features.cols()); }
};

struct TrainConfig {
  double learning_rate = 2e-3;
  double momentum = 0.9;
  int epochs = 50;
  int batch_size = 128;
  std::uint64_t seed = 0;
  double smooth_l1_beta = 1.0;
};

/// Mean smooth-L1 loss over a batch plus its gradient for every parameter.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  double mean_loss = 0.0;
};

Gradients backward(const MlpModel& model, const Eigen::MatrixXd& batch,
                   const Eigen::VectorXd& targets, double beta);

/// Minibatch SGD with momentum. Returns one mean-loss entry per epoch.
/// Shuffling and therefore the whole trajectory is reproducible from
/// cfg.seed. Throws if the loss turns non-finite, naming the epoch.
std::vector<double> train(MlpModel& model, const LabeledDataset& data, const TrainConfig& cfg);

/// Mean squared error of forward() against the labels.
double mse(const MlpModel& model, const LabeledDataset& data);

struct GridSearchResult {
  std::vector<int> best_hidden;
  std::size_t best_index = 0;
  std::vector<double> cell_mse;  // mean validation MSE per grid cell
};

/// k-fold cross-validated grid search over hidden-layer layouts. Folds are
/// a seeded disjoint cover of the data. The winning cell minimizes mean
/// validation MSE; ties go to the model with fewer parameters, then to
/// grid order.
GridSearchResult grid_search_cv(const LabeledDataset& data,
                                const std::vector<std::vector<int>>& grid,
                                int folds, const TrainConfig& cfg);

/// Binary model file: magic, version, input dim and layer widths, then
/// little-endian 64-bit parameters in layer order, weights row-major
/// before biases. load(save(m)) reproduces forward outputs bit for bit.
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace latrack
