#include "hgd/model.hpp"

#include "hgd/error.hpp"
#include "hgd/io.hpp"
#include "json.hpp"

namespace hgd {

using nlohmann::json;

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Knn: return "knn";
        case ModelKind::LogReg: return "logreg";
        case ModelKind::Ridge: return "ridge";
        case ModelKind::Mlp: return "mlp";
        case ModelKind::Forest: return "forest";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    for (auto k : all_model_kinds())
        if (to_string(k) == name) return k;
    throw ConfigError("unknown model: " + std::string(name));
}

std::vector<ModelKind> all_model_kinds() {
    return {ModelKind::Forest, ModelKind::Knn, ModelKind::LogReg, ModelKind::Mlp, ModelKind::Ridge};
}

ModelConfig ModelConfig::defaults(ModelKind kind, std::uint64_t seed) {
    ModelConfig c;
    c.kind = kind;
    c.seed = seed;
    c.logreg.seed = seed;
    c.mlp.seed = seed;
    return c;
}

ModelKind kind_of(const ClassifierModel& m) {
    return std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, KnnModel>) return ModelKind::Knn;
            else if constexpr (std::is_same_v<T, LogRegModel>) return ModelKind::LogReg;
            else if constexpr (std::is_same_v<T, RidgeModel>) return ModelKind::Ridge;
            else if constexpr (std::is_same_v<T, MlpModel>) return ModelKind::Mlp;
            else return ModelKind::Forest;
        },
        m);
}

const std::vector<std::string>& labels_of(const ClassifierModel& m) {
    return std::visit([](const auto& v) -> const std::vector<std::string>& { return v.labels; }, m);
}

ClassifierModel fit_model(const ModelConfig& cfg, const LabeledSet& data) {
    switch (cfg.kind) {
        case ModelKind::Knn: return knn_fit(data, cfg.k);
        case ModelKind::LogReg: return logreg_fit(data, cfg.logreg);
        case ModelKind::Ridge: return ridge_fit(data, cfg.alpha);
        case ModelKind::Mlp: return mlp_fit(data, cfg.mlp, cfg.hidden);
        case ModelKind::Forest: return forest_fit(data, cfg.n_trees, cfg.seed);
    }
    throw ConfigError("unknown model kind");
}

std::string predict(const ClassifierModel& m, std::span<const double> x) {
    return std::visit(
        [&](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, KnnModel>) return knn_predict(v, x);
            else if constexpr (std::is_same_v<T, LogRegModel>) return logreg_predict(v, x);
            else if constexpr (std::is_same_v<T, RidgeModel>) return ridge_predict(v, x);
            else if constexpr (std::is_same_v<T, MlpModel>) return mlp_predict(v, x);
            else return forest_predict(v, x);
        },
        m);
}

// ---------------------------------------------------------------------------

namespace {

void append_row(std::string& out, const Matrix& M, Eigen::Index r) {
    std::vector<double> row(static_cast<std::size_t>(M.cols()));
    for (Eigen::Index c = 0; c < M.cols(); ++c) row[static_cast<std::size_t>(c)] = M(r, c);
    io::append_double_array(out, row);
}

void append_vector(std::string& out, const ColVector& v) {
    io::append_double_array(out, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

std::string header(ModelKind kind, const std::vector<std::string>& labels, std::size_t dim,
                   const std::string& params) {
    std::string out = R"({"format":)" + io::json_string(kModelFormat) + R"(,"kind":)" +
                      io::json_string(to_string(kind)) + R"(,"labels":[)";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ',';
        out += io::json_string(labels[i]);
    }
    out += R"(],"dim":)" + std::to_string(dim) + R"(,"params":)" + params + "}\n";
    return out;
}

}  // namespace

std::string serialize_model(const ClassifierModel& model) {
    std::string out;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KnnModel>) {
                out = header(ModelKind::Knn, m.labels, static_cast<std::size_t>(m.X.cols()),
                             R"({"k":)" + std::to_string(m.k) + R"(,"n":)" + std::to_string(m.X.rows()) + "}");
                for (Eigen::Index i = 0; i < m.X.rows(); ++i) {
                    out += R"({"x":)";
                    append_row(out, m.X, i);
                    out += R"(,"y":)" + std::to_string(m.targets[static_cast<std::size_t>(i)]) + "}\n";
                }
            } else if constexpr (std::is_same_v<T, LogRegModel>) {
                out = header(ModelKind::LogReg, m.labels, static_cast<std::size_t>(m.W.cols()),
                             R"({"iterations":)" + std::to_string(m.iterations) + R"(,"final_loss":)" +
                                 io::format_double(m.final_loss) + "}");
                for (Eigen::Index r = 0; r < m.W.rows(); ++r) {
                    out += R"({"w":)";
                    append_row(out, m.W, r);
                    out += R"(,"b":)" + io::format_double(m.b(r)) + "}\n";
                }
            } else if constexpr (std::is_same_v<T, RidgeModel>) {
                out = header(ModelKind::Ridge, m.labels, static_cast<std::size_t>(m.W.cols()),
                             R"({"alpha":)" + io::format_double(m.alpha) + "}");
                out += R"({"feature_means":)";
                append_vector(out, m.feature_means);
                out += "}\n";
                for (Eigen::Index r = 0; r < m.W.rows(); ++r) {
                    out += R"({"w":)";
                    append_row(out, m.W, r);
                    out += R"(,"b":)" + io::format_double(m.b(r)) + "}\n";
                }
            } else if constexpr (std::is_same_v<T, MlpModel>) {
                std::string sizes = "[";
                for (std::size_t i = 0; i < m.layer_sizes.size(); ++i) {
                    if (i) sizes += ',';
                    sizes += std::to_string(m.layer_sizes[i]);
                }
                sizes += ']';
                out = header(ModelKind::Mlp, m.labels, m.layer_sizes.front(),
                             R"({"layer_sizes":)" + sizes + R"(,"iterations":)" + std::to_string(m.iterations) +
                                 R"(,"final_loss":)" + io::format_double(m.final_loss) + "}");
                for (std::size_t l = 0; l < m.weights.size(); ++l) {
                    const auto& W = m.weights[l];
                    std::vector<double> flat;
                    flat.reserve(static_cast<std::size_t>(W.size()));
                    for (Eigen::Index r = 0; r < W.rows(); ++r)
                        for (Eigen::Index c = 0; c < W.cols(); ++c) flat.push_back(W(r, c));
                    out += R"({"layer":)" + std::to_string(l) + R"(,"w":)";
                    io::append_double_array(out, flat);
                    out += R"(,"b":)";
                    append_vector(out, m.biases[l]);
                    out += "}\n";
                }
            } else {
                out = header(ModelKind::Forest, m.labels, m.dim,
                             R"({"n_trees":)" + std::to_string(m.n_trees) + R"(,"seed":)" + std::to_string(m.seed) +
                                 "}");
                for (const auto& t : m.trees) {
                    out += R"({"nodes":[)";
                    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
                        const auto& nd = t.nodes[i];
                        if (i) out += ',';
                        out += '[' + std::to_string(nd.feature) + ',' + io::format_double(nd.threshold) + ',' +
                               std::to_string(nd.left) + ',' + std::to_string(nd.right) + ",[";
                        for (std::size_t c = 0; c < nd.counts.size(); ++c) {
                            if (c) out += ',';
                            out += std::to_string(nd.counts[c]);
                        }
                        out += "]]";
                    }
                    out += "]}\n";
                }
            }
        },
        model);
    return out;
}

namespace {

std::vector<json> parse_lines(std::string_view text) {
    std::vector<json> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = text.find('\n', pos);
        if (end == std::string_view::npos) throw FormatError("truncated model file");
        try {
            lines.push_back(json::parse(text.substr(pos, end - pos)));
        } catch (const json::parse_error& e) {
            throw FormatError(std::string("malformed model line: ") + e.what());
        }
        pos = end + 1;
    }
    if (lines.empty()) throw FormatError("empty model file");
    return lines;
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
    Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw FormatError("parameter row has wrong length");
        for (std::size_t c = 0; c < cols; ++c) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return M;
}

ColVector to_col(const std::vector<double>& v) {
    return Eigen::Map<const ColVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ClassifierModel deserialize_model(std::string_view text) {
    const auto lines = parse_lines(text);
    try {
        const auto& h = lines.front();
        if (h.at("format").get<std::string>() != kModelFormat) throw FormatError("unsupported model format");
        const auto kind = parse_model_kind(h.at("kind").get<std::string>());
        auto labels = h.at("labels").get<std::vector<std::string>>();
        const auto dim = h.at("dim").get<std::size_t>();
        const auto& params = h.at("params");
        const std::size_t c = labels.size();

        auto expect_lines = [&](std::size_t n) {
            if (lines.size() != n + 1)
                throw FormatError("expected " + std::to_string(n) + " parameter lines, found " +
                                  std::to_string(lines.size() - 1));
        };

        switch (kind) {
            case ModelKind::Knn: {
                KnnModel m;
                m.k = params.at("k").get<std::size_t>();
                expect_lines(params.at("n").get<std::size_t>());
                std::vector<std::vector<double>> rows;
                for (std::size_t i = 1; i < lines.size(); ++i) {
                    rows.push_back(lines[i].at("x").get<std::vector<double>>());
                    const int y = lines[i].at("y").get<int>();
                    if (y < 0 || static_cast<std::size_t>(y) >= c) throw FormatError("label index out of range");
                    m.targets.push_back(y);
                }
                m.X = rows_to_matrix(rows, dim);
                m.labels = std::move(labels);
                return m;
            }
            case ModelKind::LogReg:
            case ModelKind::Ridge: {
                const std::size_t offset = kind == ModelKind::Ridge ? 1 : 0;
                expect_lines(c + offset);
                std::vector<std::vector<double>> rows;
                ColVector b(static_cast<Eigen::Index>(c));
                for (std::size_t r = 0; r < c; ++r) {
                    const auto& line = lines[1 + offset + r];
                    rows.push_back(line.at("w").get<std::vector<double>>());
                    b(static_cast<Eigen::Index>(r)) = line.at("b").get<double>();
                }
                if (kind == ModelKind::LogReg) {
                    LogRegModel m;
                    m.W = rows_to_matrix(rows, dim);
                    m.b = b;
                    m.labels = std::move(labels);
                    m.iterations = params.at("iterations").get<std::size_t>();
                    m.final_loss = params.at("final_loss").get<double>();
                    return m;
                }
                RidgeModel m;
                m.alpha = params.at("alpha").get<double>();
                m.W = rows_to_matrix(rows, dim);
                m.b = b;
                m.labels = std::move(labels);
                m.feature_means = to_col(lines[1].at("feature_means").get<std::vector<double>>());
                if (static_cast<std::size_t>(m.feature_means.size()) != dim)
                    throw FormatError("feature_means has wrong length");
                return m;
            }
            case ModelKind::Mlp: {
                MlpModel m;
                m.layer_sizes = params.at("layer_sizes").get<std::vector<std::size_t>>();
                if (m.layer_sizes.size() < 2 || m.layer_sizes.front() != dim || m.layer_sizes.back() != c)
                    throw FormatError("layer_sizes inconsistent with header");
                m.iterations = params.at("iterations").get<std::size_t>();
                m.final_loss = params.at("final_loss").get<double>();
                expect_lines(m.layer_sizes.size() - 1);
                for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
                    const auto& line = lines[1 + l];
                    const auto flat = line.at("w").get<std::vector<double>>();
                    const auto out = m.layer_sizes[l + 1];
                    const auto in = m.layer_sizes[l];
                    if (flat.size() != out * in) throw FormatError("layer weights have wrong size");
                    Matrix W(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
                    for (std::size_t r = 0; r < out; ++r)
                        for (std::size_t k = 0; k < in; ++k)
                            W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = flat[r * in + k];
                    m.weights.push_back(std::move(W));
                    const auto bias = line.at("b").get<std::vector<double>>();
                    if (bias.size() != out) throw FormatError("layer bias has wrong size");
                    m.biases.push_back(to_col(bias));
                }
                m.labels = std::move(labels);
                return m;
            }
            case ModelKind::Forest: {
                ForestModel m;
                m.n_trees = params.at("n_trees").get<std::size_t>();
                m.seed = params.at("seed").get<std::uint64_t>();
                m.dim = dim;
                expect_lines(m.n_trees);
                for (std::size_t t = 1; t < lines.size(); ++t) {
                    DecisionTree tree;
                    for (const auto& nd : lines[t].at("nodes")) {
                        TreeNode node;
                        node.feature = nd.at(0).get<int>();
                        node.threshold = nd.at(1).get<double>();
                        node.left = nd.at(2).get<int>();
                        node.right = nd.at(3).get<int>();
                        node.counts = nd.at(4).get<std::vector<std::size_t>>();
                        if (node.counts.size() != c) throw FormatError("node counts have wrong length");
                        tree.nodes.push_back(std::move(node));
                    }
                    const auto n_nodes = static_cast<int>(tree.nodes.size());
                    for (const auto& node : tree.nodes) {
                        if (node.is_leaf()) continue;
                        if (node.feature >= static_cast<int>(dim) || node.left <= 0 || node.right <= 0 ||
                            node.left >= n_nodes || node.right >= n_nodes)
                            throw FormatError("tree node references are out of range");
                    }
                    if (tree.nodes.empty()) throw FormatError("empty tree");
                    m.trees.push_back(std::move(tree));
                }
                m.labels = std::move(labels);
                return m;
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid model file: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(e.what());
    }
    throw FormatError("unknown model kind");
}

}  // namespace hgd
