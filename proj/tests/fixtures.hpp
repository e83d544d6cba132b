#pragma once
// Small hand-built datasets and forests shared by several test files.

#include <memory>
#include <string>

#include "genforest/data.hpp"
#include "genforest/forest.hpp"
#include "genforest/trainer.hpp"

namespace fixture {

inline std::string data_dir() { return GENFOREST_TEST_DATA_DIR; }

// Eight hand-placed points in [0,7] x [0,6].
inline std::shared_ptr<const genforest::Dataset> toy8() {
  return std::make_shared<const genforest::Dataset>(genforest::parse_csv(
      "x,y\n"
      "0.0,0.0\n"
      "1.0,0.5\n"
      "2.0,3.0\n"
      "3.0,1.0\n"
      "4.0,4.0\n"
      "5.0,2.0\n"
      "6.0,5.0\n"
      "7.0,6.0\n"));
}

inline genforest::SplitPredicate numeric(std::size_t feature, double t, bool strict = false) {
  genforest::SplitPredicate p;
  p.feature = feature;
  p.threshold = t;
  p.strict_left = strict;
  return p;
}

// Two trees, three splits: tree 0 cuts x > 3 then y > 1 on its left child;
// tree 1 cuts y > 2.
inline genforest::Forest toy8_forest(genforest::ForestMode mode = genforest::ForestMode::GF) {
  genforest::TrainConfig cfg;
  cfg.trees = 2;
  cfg.mode = mode;
  genforest::Trainer trainer(toy8(), cfg);
  trainer.apply(0, 0, numeric(0, 3.0));
  trainer.apply(0, 1, numeric(1, 1.0));
  trainer.apply(1, 0, numeric(1, 2.0));
  return trainer.finish();
}

}  // namespace fixture
