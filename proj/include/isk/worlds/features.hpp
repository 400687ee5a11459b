#pragma once

#include <string>
#include <vector>

#include "isk/worlds/env.hpp"

namespace isk::worlds {

// Tabular dataset: header row, numeric cells, final column = integer label.
struct FeatureTable {
  std::vector<std::string> names;  // feature column names (label column omitted)
  Tensor x;                        // [N, dim]
  std::vector<int> y;              // [N]
  int classes = 0;                 // 1 + max label

  int count() const { return x.rank() == 2 ? x.shape()[0] : 0; }
  int dim() const { return x.rank() == 2 ? x.shape()[1] : 0; }
};

FeatureTable parse_feature_csv(const std::string& text, const std::string& origin);
FeatureTable load_feature_csv(const std::string& path);

// Permutation-invariant feature acquisition: question i reveals feature i
// of a uniformly drawn row.
class FeatureEnv : public Environment {
 public:
  explicit FeatureEnv(FeatureTable table);

  const char* name() const override { return "features"; }
  const QuestionSpace& questions() const override { return questions_; }
  int label_count() const override { return table_.classes; }
  std::vector<int> x_shape() const override { return {table_.dim()}; }
  Example sample(Rng& rng) const override;
  StepResult observe(const Example& ex, int q) const override;

  const FeatureTable& table() const { return table_; }

 private:
  FeatureTable table_;
  QuestionSpace questions_;
};

}  // namespace isk::worlds
