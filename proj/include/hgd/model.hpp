#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hgd/classifiers.hpp"

namespace hgd {

enum class ModelKind { Knn, LogReg, Ridge, Mlp, Forest };

/// "knn", "logreg", "ridge", "mlp", "forest".
std::string_view to_string(ModelKind kind);
/// Throws ConfigError on an unknown name.
ModelKind parse_model_kind(std::string_view name);
/// Every kind, ordered by name.
std::vector<ModelKind> all_model_kinds();

/// Hyperparameters for one classifier family. Only the fields of `kind` are
/// read; defaults follow the reference configuration (K=7, 2x100 sigmoid MLP,
/// 100 Gini trees, ridge alpha 1.0).
struct ModelConfig {
    ModelKind kind = ModelKind::Knn;
    std::size_t k = 7;
    TrainConfig logreg = TrainConfig::logreg_defaults();
    double alpha = 1.0;
    TrainConfig mlp = TrainConfig::mlp_defaults();
    std::array<std::size_t, 2> hidden = {100, 100};
    std::size_t n_trees = 100;
    std::uint64_t seed = 0;

    static ModelConfig defaults(ModelKind kind, std::uint64_t seed = 0);
};

using ClassifierModel = std::variant<KnnModel, LogRegModel, RidgeModel, MlpModel, ForestModel>;

ModelKind kind_of(const ClassifierModel& m);
const std::vector<std::string>& labels_of(const ClassifierModel& m);

ClassifierModel fit_model(const ModelConfig& cfg, const LabeledSet& data);
std::string predict(const ClassifierModel& m, std::span<const double> x);

inline constexpr std::string_view kModelFormat = "hgd-model/1";

/// Header line (format, kind, labels, dim, hyperparameters) followed by
/// parameter lines; floats use shortest round-trip decimals.
std::string serialize_model(const ClassifierModel& m);
ClassifierModel deserialize_model(std::string_view text);

}  // namespace hgd
