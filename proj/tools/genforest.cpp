// genforest: command-line front end for training, sampling, imputation and
// evaluation of generative forests.
//
// Exit codes: 0 success, 2 usage, 3 data or model error, 4 internal error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "genforest/data.hpp"
#include "genforest/errors.hpp"
#include "genforest/evaluator.hpp"
#include "genforest/forest.hpp"
#include "genforest/imputer.hpp"
#include "genforest/parallel.hpp"
#include "genforest/sampler.hpp"
#include "genforest/trainer.hpp"

namespace gf = genforest;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct Globals {
  std::size_t threads = gf::default_threads();
  std::uint64_t seed = 0;
  std::string missing_token;

  gf::CsvOptions csv() const {
    gf::CsvOptions o;
    o.missing_token = missing_token;
    return o;
  }
};

struct TrainFlags {
  std::size_t trees = 1;
  std::size_t splits = 0;
  std::string mode = "gf";
  std::string loss = "square";
  double prior = 0.5;
  std::size_t cat_cutoff = 22;
  std::size_t cat_samples = 1000;
  std::size_t min_child_rows = 1;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--trees", trees, "Number of trees")->check(CLI::PositiveNumber);
    cmd->add_option("--splits", splits, "Total number of splits");
    cmd->add_option("--mode", mode, "gf or eogt")->check(CLI::IsMember({"gf", "eogt"}));
    cmd->add_option("--loss", loss, "square, log or matusita")->check(CLI::IsMember({"square", "log", "matusita"}));
    cmd->add_option("--prior", prior, "Prior of the real class")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--cat-cutoff", cat_cutoff, "Exhaustive categorical search up to this many modalities");
    cmd->add_option("--cat-samples", cat_samples, "Random categorical subsets tried above the cutoff");
    cmd->add_option("--min-child-rows", min_child_rows, "Rows required on each side of a split");
  }

  gf::TrainConfig config(const Globals& g) const {
    gf::TrainConfig c;
    c.trees = trees;
    c.splits = splits;
    c.mode = mode == "eogt" ? gf::ForestMode::EOGT : gf::ForestMode::GF;
    c.loss = *gf::Loss::from_name(loss);
    c.prior = prior;
    c.cat_cutoff = cat_cutoff;
    c.cat_samples = cat_samples;
    c.min_child_rows = min_child_rows;
    c.seed = g.seed;
    c.threads = g.threads;
    c.validate();
    return c;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gf::DataError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw gf::DataError("failed writing '" + path + "'");
}

// A GF needs its training rows; they come from --data or the path recorded
// in the model file.
gf::Forest open_model(const std::string& path, const std::string& data_path, const Globals& g) {
  const auto header = gf::peek_model(path);
  if (header.mode == gf::ForestMode::EOGT) return gf::load_forest(path);
  const std::string source = data_path.empty() ? header.data_source : data_path;
  if (source.empty()) throw gf::ModelError("generative forest model needs its training data (--data)");
  auto data = std::make_shared<const gf::Dataset>(gf::load_csv(source, header.schema, g.csv()));
  return gf::load_forest(path, std::move(data));
}

std::string leaf_summary(const gf::Forest& forest) {
  std::ostringstream out;
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    out << (t ? " " : "") << forest.trees[t].leaf_count();
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative forests for tabular data"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--missing-token", g.missing_token, "CSV token marking a missing value");

  // train
  auto* train = app.add_subcommand("train", "Train a model");
  std::string train_data;
  std::string train_out;
  std::string history_out;
  TrainFlags tf;
  train->add_option("--data", train_data, "Training CSV")->required();
  train->add_option("--out", train_out, "Model file")->required();
  train->add_option("--history", history_out, "History CSV (default: <out>.history.csv)");
  tf.add_to(train);

  // generate
  auto* gen = app.add_subcommand("generate", "Sample observations from a model");
  std::string gen_model;
  std::string gen_data;
  std::string gen_out;
  std::size_t gen_n = 0;
  std::string gen_order = "iterative";
  gen->add_option("--model", gen_model, "Model file")->required();
  gen->add_option("--data", gen_data, "Training CSV of a generative forest");
  gen->add_option("--n", gen_n, "Number of observations")->required();
  gen->add_option("--out", gen_out, "Output CSV (default: stdout)");
  gen->add_option("--order", gen_order, "iterative or randomized")->check(CLI::IsMember({"iterative", "randomized"}));

  // impute
  auto* imp = app.add_subcommand("impute", "Fill missing cells");
  std::string imp_model;
  std::string imp_data;
  std::string imp_input;
  std::string imp_out;
  std::string imp_method = "forest";
  imp->add_option("--model", imp_model, "Model file (also fixes the schema)")->required();
  imp->add_option("--data", imp_data, "Training CSV of a generative forest, or for the marginal baselines");
  imp->add_option("--input", imp_input, "CSV with missing cells")->required();
  imp->add_option("--out", imp_out, "Completed CSV (default: stdout)");
  imp->add_option("--method", imp_method, "forest, marginal, mean or mode")
      ->check(CLI::IsMember({"forest", "marginal", "mean", "mode"}));

  // density
  auto* den = app.add_subcommand("density", "Model density at complete observations");
  std::string den_model;
  std::string den_data;
  std::string den_input;
  std::string den_out;
  den->add_option("--model", den_model, "Model file")->required();
  den->add_option("--data", den_data, "Training CSV of a generative forest");
  den->add_option("--input", den_input, "CSV of observations")->required();
  den->add_option("--out", den_out, "Output CSV (default: stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluation protocols");
  eval->require_subcommand(1);
  auto* metrics = eval->add_subcommand("impute-metrics", "perr and rmse over masked cells");
  std::string met_imputed;
  std::string met_truth;
  std::string met_mask;
  metrics->add_option("--imputed", met_imputed, "Imputed CSV")->required();
  metrics->add_option("--truth", met_truth, "Ground-truth CSV")->required();
  metrics->add_option("--mask", met_mask, "Mask CSV")->required();

  auto* life = eval->add_subcommand("lifelike", "k-fold optimal transport of generated against held-out data");
  std::string life_data;
  std::string life_out;
  std::size_t life_folds = 5;
  double life_eps = 0.5;
  std::string life_ground = "l1";
  TrainFlags lf;
  life->add_option("--data", life_data, "CSV")->required();
  life->add_option("--out", life_out, "Per-fold CSV (default: stdout)");
  life->add_option("--folds", life_folds, "Number of folds")->check(CLI::Range(2, 1000));
  life->add_option("--eps", life_eps, "Entropic regularization")->check(CLI::PositiveNumber);
  life->add_option("--ground", life_ground, "l1 or sql2")->check(CLI::IsMember({"l1", "sql2"}));
  lf.add_to(life);

  // synth
  auto* syn = app.add_subcommand("synth", "Write a simulated 2D domain");
  std::string syn_domain;
  std::string syn_out;
  syn->add_option("--domain", syn_domain, "ring, grid, circ or rand")
      ->required()
      ->check(CLI::IsMember({"ring", "grid", "circ", "rand", "ringGauss", "gridGauss", "circGauss", "randGauss"}));
  syn->add_option("--out", syn_out, "Output CSV (default: stdout)");

  // mask
  auto* msk = app.add_subcommand("mask", "Mask cells completely at random");
  std::string msk_data;
  std::string msk_out;
  std::string msk_mask;
  double msk_rate = 0.05;
  msk->add_option("--data", msk_data, "Complete CSV")->required();
  msk->add_option("--rate", msk_rate, "Masking probability per cell")->check(CLI::Range(0.0, 1.0));
  msk->add_option("--out", msk_out, "Masked CSV")->required();
  msk->add_option("--mask-out", msk_mask, "Mask CSV")->required();

  // convert
  auto* conv = app.add_subcommand("convert", "Convert a generative forest into an ensemble of generative trees");
  std::string conv_model;
  std::string conv_data;
  std::string conv_out;
  conv->add_option("--model", conv_model, "GF model file")->required();
  conv->add_option("--data", conv_data, "Training CSV (default: recorded path)");
  conv->add_option("--out", conv_out, "EOGT model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  auto emit = [](const std::string& path, const std::string& text) {
    if (path.empty()) {
      std::cout << text;
    } else {
      write_text(path, text);
    }
  };

  try {
    if (*train) {
      const auto config = tf.config(g);
      auto data = std::make_shared<const gf::Dataset>(gf::load_csv(train_data, g.csv()));
      auto result = gf::train(data, config);
      result.forest.data_source = train_data;
      gf::save_forest(result.forest, train_out);
      write_text(history_out.empty() ? train_out + ".history.csv" : history_out,
                 gf::history_csv(result.history, data->schema()));
      const double final_risk = result.history.empty() ? result.initial_poprisk : result.history.back().poprisk;
      std::cout.precision(10);
      std::cout << "initial poprisk " << result.initial_poprisk << '\n'
                << "final poprisk " << final_risk << '\n'
                << "splits " << result.splits_done << (result.stopped_early ? " (no admissible split left)" : "")
                << '\n'
                << "leaves per tree " << leaf_summary(result.forest) << '\n';
    } else if (*gen) {
      const auto forest = open_model(gen_model, gen_data, g);
      gf::GenerateOptions options;
      options.order = gen_order == "randomized" ? gf::Order::Randomized : gf::Order::Iterative;
      options.threads = g.threads;
      emit(gen_out, gf::to_csv(gf::generate(forest, gen_n, g.seed, options), g.missing_token));
    } else if (*imp) {
      const auto header = gf::peek_model(imp_model);
      const auto masked = gf::load_csv(imp_input, header.schema, g.csv());
      gf::Dataset completed;
      if (imp_method == "forest") {
        const auto forest = open_model(imp_model, imp_data, g);
        completed = gf::impute_dataset(forest, masked, g.seed, g.threads);
      } else {
        const std::string source = imp_data.empty() ? header.data_source : imp_data;
        if (source.empty()) throw gf::DataError("marginal baselines need training data (--data)");
        const auto train_ds = gf::load_csv(source, header.schema, g.csv());
        const auto mode = imp_method == "mean"   ? gf::MarginalMode::Mean
                          : imp_method == "mode" ? gf::MarginalMode::Mode
                                                 : gf::MarginalMode::Sample;
        completed = gf::marginal_impute(train_ds, masked, g.seed, mode);
      }
      emit(imp_out, gf::to_csv(completed, g.missing_token));
    } else if (*den) {
      const auto forest = open_model(den_model, den_data, g);
      const auto points = gf::load_csv(den_input, forest.schema, g.csv());
      std::ostringstream out;
      out.precision(17);
      out << "density,point_mass\n";
      for (std::size_t r = 0; r < points.size(); ++r) {
        const auto d = gf::density(forest, points.row(r));
        out << d.value << ',' << (d.point_mass ? 1 : 0) << '\n';
      }
      emit(den_out, out.str());
    } else if (*eval) {
      if (*metrics) {
        const auto truth = gf::load_csv(met_truth, g.csv());
        const auto imputed = gf::load_csv(met_imputed, truth.schema(), g.csv());
        const auto mask = gf::load_mask(met_mask);
        const auto p = gf::perr(imputed, truth, mask);
        const auto r = gf::rmse(imputed, truth, mask);
        std::cout.precision(10);
        std::cout << "metric,value\n";
        std::cout << "perr," << (p ? std::to_string(*p) : "NA") << '\n';
        std::cout << "rmse," << (r ? std::to_string(*r) : "NA") << '\n';
      } else {
        const auto ds = gf::load_csv(life_data, g.csv());
        gf::LifelikeConfig config;
        config.folds = life_folds;
        config.train = lf.config(g);
        config.ot.eps = life_eps;
        config.ot.ground = life_ground == "sql2" ? gf::GroundCost::SquaredL2 : gf::GroundCost::L1;
        config.seed = g.seed;
        config.threads = g.threads;
        emit(life_out, gf::lifelike_csv(gf::kfold_lifelike(ds, config)));
      }
    } else if (*syn) {
      emit(syn_out, gf::to_csv(gf::synth_domain(syn_domain, g.seed), g.missing_token));
    } else if (*msk) {
      const auto masked = gf::apply_mcar(gf::load_csv(msk_data, g.csv()), msk_rate, g.seed);
      gf::write_csv(masked.data, msk_out, g.missing_token);
      gf::write_mask(masked.mask, msk_mask);
    } else if (*conv) {
      gf::Forest eogt = gf::to_eogt(open_model(conv_model, conv_data, g));
      gf::save_forest(eogt, conv_out);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const gf::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const gf::ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kExitData;
  } catch (const gf::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
