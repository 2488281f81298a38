#include "sslhop/config.hpp"
#include "sslhop/dataset.hpp"
#include "sslhop/hoptree.hpp"
#include "sslhop/llsr.hpp"
#include "sslhop/model_io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace sslhop;

int worker_threads() {
  if (const char* env = std::getenv("SSLHOP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

Dataset load_data(const std::string& images, const std::string& labels, const std::string& dir) {
  if (!dir.empty()) return load_image_dir(dir);
  if (images.empty()) throw std::runtime_error("--images or --dir is required");
  return load_idx(images, labels);
}

void require_nonempty(const Dataset& data) {
  if (data.images.empty()) throw std::runtime_error("empty dataset");
}

const LLSRModel& head_of(const Model& model) {
  if (!model.head) throw std::runtime_error("model has no decision head");
  return *model.head;
}

std::string prediction_line(std::size_t index, const Prediction& p) {
  std::string line = std::to_string(index) + '\t' + std::to_string(p.label);
  for (Eigen::Index k = 0; k < p.scores.size(); ++k) line += '\t' + format_g9(p.scores[k]);
  line += '\n';
  return line;
}

int run_train(const std::string& config_path, const std::string& images,
              const std::string& labels, const std::string& dir, const std::string& out_path) {
  const TrainConfig config = load_config(config_path);
  const Dataset data = load_data(images, labels, dir);
  require_nonempty(data);
  if (data.labels.empty()) throw std::runtime_error("training requires labels");

  Model model;
  model.tree = fit_hoptree(data.images, config.hop);
  const Matrix features = transform_all(data.images, model.tree, worker_threads());
  model.head = fit_llsr(features, data.labels, data.class_count, config.head_ridge);
  save_model(model, out_path);

  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    if (predict(*model.head, features.row(i).transpose()).label == data.labels[static_cast<std::size_t>(i)])
      ++correct;

  std::cout << describe(model.tree);
  std::cout << "training accuracy " << format_g9(static_cast<double>(correct) / static_cast<double>(features.rows()))
            << '\n';
  return 0;
}

int run_predict(const std::string& model_path, const std::string& images, const std::string& dir) {
  const Model model = load_model(model_path);
  const LLSRModel& head = head_of(model);
  const Dataset data = load_data(images, "", dir);
  require_nonempty(data);

  const Matrix features = transform_all(data.images, model.tree, worker_threads());
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    std::cout << prediction_line(static_cast<std::size_t>(i),
                                 predict(head, features.row(i).transpose()));
  return 0;
}

int run_evaluate(const std::string& model_path, const std::string& images,
                 const std::string& labels, const std::string& dir) {
  const Model model = load_model(model_path);
  const LLSRModel& head = head_of(model);
  const Dataset data = load_data(images, labels, dir);
  require_nonempty(data);
  if (data.labels.empty()) throw std::runtime_error("evaluation requires labels");

  const int k = head.n_classes;
  for (int label : data.labels)
    if (label < 0 || label >= k) throw std::runtime_error("label out of range");

  const Matrix features = transform_all(data.images, model.tree, worker_threads());
  std::vector<std::vector<std::size_t>> confusion(static_cast<std::size_t>(k),
                                                  std::vector<std::size_t>(static_cast<std::size_t>(k), 0));
  std::size_t correct = 0;
  std::string lines;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const Prediction p = predict(head, features.row(i).transpose());
    const int truth = data.labels[static_cast<std::size_t>(i)];
    ++confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(p.label)];
    if (p.label == truth) ++correct;
    lines += prediction_line(static_cast<std::size_t>(i), p);
  }

  std::cout << lines;
  std::cout << "accuracy " << format_g9(static_cast<double>(correct) / static_cast<double>(features.rows()))
            << '\n';
  for (int t = 0; t < k; ++t) {
    std::string row;
    for (int p = 0; p < k; ++p) {
      if (p > 0) row += '\t';
      row += std::to_string(confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]);
    }
    std::cout << row << '\n';
  }
  return 0;
}

int run_inspect(const std::string& model_path) {
  const Model model = load_model(model_path);
  TrainConfig config;
  config.hop = model.tree.config;
  config.head_ridge = model.head ? model.head->ridge : -1.0;
  std::cout << dump_config(config);
  std::cout << describe(model.tree);
  return 0;
}

int run_extract(const std::string& model_path, const std::string& images, const std::string& dir,
                const std::string& out_path) {
  const Model model = load_model(model_path);
  const Dataset data = load_data(images, "", dir);
  require_nonempty(data);
  save_features(transform_all(data.images, model.tree, worker_threads()), out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"successive-subspace image features with a linear decision head"};
  app.require_subcommand(1);

  std::string config_path, images, labels, dir, model_path, out_path;

  CLI::App* train = app.add_subcommand("train", "fit a hop tree and decision head");
  train->add_option("--config", config_path, "key=value config file")->required();
  train->add_option("--images", images, "IDX image file");
  train->add_option("--labels", labels, "IDX label file");
  train->add_option("--dir", dir, "directory with one PGM subdirectory per class");
  train->add_option("--out", out_path, "output model path")->required();

  CLI::App* predict_cmd = app.add_subcommand("predict", "print per-image class and scores");
  predict_cmd->add_option("--model", model_path, "model file")->required();
  predict_cmd->add_option("--images", images, "IDX image file");
  predict_cmd->add_option("--dir", dir, "directory with one PGM subdirectory per class");

  CLI::App* evaluate = app.add_subcommand("evaluate", "predict, then print accuracy and confusion");
  evaluate->add_option("--model", model_path, "model file")->required();
  evaluate->add_option("--images", images, "IDX image file");
  evaluate->add_option("--labels", labels, "IDX label file");
  evaluate->add_option("--dir", dir, "directory with one PGM subdirectory per class");

  CLI::App* inspect = app.add_subcommand("inspect", "print config and tree report");
  inspect->add_option("--model", model_path, "model file")->required();

  CLI::App* extract = app.add_subcommand("extract", "write the feature matrix for a dataset");
  extract->add_option("--model", model_path, "model file")->required();
  extract->add_option("--images", images, "IDX image file");
  extract->add_option("--dir", dir, "directory with one PGM subdirectory per class");
  extract->add_option("--out", out_path, "output feature path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*train) return run_train(config_path, images, labels, dir, out_path);
    if (*predict_cmd) return run_predict(model_path, images, dir);
    if (*evaluate) return run_evaluate(model_path, images, labels, dir);
    if (*inspect) return run_inspect(model_path);
    if (*extract) return run_extract(model_path, images, dir, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
