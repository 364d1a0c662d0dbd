#include "hgd/embeddings.hpp"

#include <cmath>
#include <iterator>
#include <limits>
#include <sstream>

#include "hgd/error.hpp"
#include "hgd/io.hpp"
#include "json.hpp"

namespace hgd {

using nlohmann::json;

std::string_view to_string(PoolingStrategy p) {
    return p == PoolingStrategy::LastLayer ? "last_layer" : "avg_last4";
}

PoolingStrategy parse_pooling(std::string_view tag) {
    if (tag == "last_layer") return PoolingStrategy::LastLayer;
    if (tag == "avg_last4") return PoolingStrategy::AvgLastFour;
    throw FormatError("unknown pooling tag: " + std::string(tag));
}

EmbeddingStore::EmbeddingStore(std::size_t dim, PoolingStrategy pooling, std::string model_id,
                               std::vector<EmbeddingRecord> records)
    : dim_(dim), pooling_(pooling), model_id_(std::move(model_id)), records_(std::move(records)) {
    if (dim_ == 0) throw FormatError("store dimension must be positive");
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        const auto id = static_cast<std::int64_t>(r.record_id);
        if (r.vector.size() != dim_) {
            throw FormatError("vector has " + std::to_string(r.vector.size()) + " components, header dim is " +
                                  std::to_string(dim_),
                              id);
        }
        for (double x : r.vector)
            if (!std::isfinite(x)) throw FormatError("non-finite vector component", id);
        if (!position_.emplace(r.record_id, i).second) throw FormatError("duplicate record id", id);
        index_[r.homograph].push_back(r.record_id);
    }
}

const EmbeddingRecord* EmbeddingStore::find(RecordId id) const {
    const auto it = position_.find(id);
    return it == position_.end() ? nullptr : &records_[it->second];
}

// ---------------------------------------------------------------------------

void write_store(const EmbeddingStore& s, std::ostream& sink) {
    std::string line;
    line += R"({"format":)" + io::json_string(kStoreFormat);
    line += R"(,"dim":)" + std::to_string(s.dim());
    line += R"(,"pooling":)" + io::json_string(to_string(s.pooling()));
    line += R"(,"model":)" + io::json_string(s.model_id()) + "}\n";
    sink << line;
    for (const auto& r : s.records()) {
        line.clear();
        line += R"({"id":)" + std::to_string(r.record_id);
        line += R"(,"homograph":)" + io::json_string(r.homograph);
        line += R"(,"phoneme":)" + io::json_string(r.phoneme);
        line += R"(,"vector":)";
        io::append_double_array(line, r.vector);
        line += "}\n";
        sink << line;
    }
}

std::string store_to_string(const EmbeddingStore& s) {
    std::ostringstream os;
    write_store(s, os);
    return std::move(os).str();
}

namespace {

json parse_line(std::string_view line, std::int64_t record_id, const char* what) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("malformed ") + what + ": " + e.what(), record_id);
    }
}

template <typename T>
T field(const json& obj, const char* key, std::int64_t record_id) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw FormatError(std::string("missing field \"") + key + "\"", record_id);
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw FormatError(std::string("field \"") + key + "\" has the wrong type", record_id);
    }
}

}  // namespace

EmbeddingStore read_store_string(std::string_view text) {
    if (text.empty()) throw FormatError("truncated stream: missing header");
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = text.find('\n', pos);
        if (end == std::string_view::npos) throw FormatError("truncated stream: last line is not terminated");
        lines.push_back(text.substr(pos, end - pos));
        pos = end + 1;
    }

    const json header = parse_line(lines.front(), -1, "header");
    if (!header.is_object()) throw FormatError("header is not an object");
    if (field<std::string>(header, "format", -1) != kStoreFormat)
        throw FormatError("unsupported format tag, expected " + std::string(kStoreFormat));
    const auto dim = field<std::int64_t>(header, "dim", -1);
    if (dim <= 0) throw FormatError("header dim must be positive");
    const auto pooling = parse_pooling(field<std::string>(header, "pooling", -1));
    auto model = field<std::string>(header, "model", -1);

    std::vector<EmbeddingRecord> records;
    records.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const json obj = parse_line(lines[i], -1, "record line");
        if (!obj.is_object()) throw FormatError("record line " + std::to_string(i + 1) + " is not an object");
        const auto id = field<std::int64_t>(obj, "id", -1);
        if (id < 0) throw FormatError("negative record id", id);
        EmbeddingRecord r;
        r.record_id = static_cast<RecordId>(id);
        r.homograph = field<std::string>(obj, "homograph", id);
        r.phoneme = field<std::string>(obj, "phoneme", id);
        r.vector = field<Vector>(obj, "vector", id);
        if (r.vector.size() != static_cast<std::size_t>(dim)) {
            throw FormatError("vector has " + std::to_string(r.vector.size()) + " components, header dim is " +
                                  std::to_string(dim),
                              id);
        }
        records.push_back(std::move(r));
    }
    return EmbeddingStore(static_cast<std::size_t>(dim), pooling, std::move(model), std::move(records));
}

EmbeddingStore read_store(std::istream& source) {
    std::string text{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
    return read_store_string(text);
}

// ---------------------------------------------------------------------------

namespace {

double norm_of(std::span<const double> u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    return std::sqrt(s);
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw DimensionError("cosine of vectors with lengths " + std::to_string(u.size()) + " and " +
                             std::to_string(v.size()));
    const double nu = norm_of(u);
    const double nv = norm_of(v);
    if (nu == 0.0) throw DegenerateVectorError(0, "cosine of a zero-norm vector (first argument)");
    if (nv == 0.0) throw DegenerateVectorError(1, "cosine of a zero-norm vector (second argument)");
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
    return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

double mean_pairwise_cosine(std::span<const Vector> vectors) {
    if (vectors.size() < 2) throw InsufficientDataError("mean pairwise cosine needs at least two vectors");
    const std::size_t dim = vectors.front().size();
    std::vector<double> norms(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != dim) throw DimensionError("vector " + std::to_string(i) + " has a different length");
        norms[i] = norm_of(vectors[i]);
        if (norms[i] == 0.0)
            throw DegenerateVectorError(static_cast<std::int64_t>(i),
                                        "vector " + std::to_string(i) + " has zero norm");
    }
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += vectors[i][k] * vectors[j][k];
            total += std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

// ---------------------------------------------------------------------------

SynthSpec parse_synth_spec(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("synth spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("synth spec must be a JSON object");
    SynthSpec spec;
    try {
        spec.dim = doc.at("dim").get<std::size_t>();
        spec.noise_sigma = doc.at("noise_sigma").get<double>();
        spec.class_separation = doc.at("class_separation").get<double>();
        spec.seed = doc.value("seed", std::uint64_t{0});
        if (doc.contains("pooling")) spec.pooling = parse_pooling(doc.at("pooling").get<std::string>());
        spec.model_id = doc.value("model", std::string("synthetic"));
        if (doc.contains("reference_shaped_per_phoneme")) {
            spec.inventories = reference_shaped_inventories(doc.at("reference_shaped_per_phoneme").get<std::size_t>());
        }
        if (doc.contains("inventories")) {
            for (const auto& inv : doc.at("inventories")) {
                SynthInventory s;
                s.homograph = inv.at("homograph").get<std::string>();
                for (const auto& [label, count] : inv.at("phonemes").items()) {
                    const auto c = count.get<std::int64_t>();
                    if (c < 0) throw ConfigError("negative count for " + s.homograph + "/" + label);
                    s.counts[label] = static_cast<std::size_t>(c);
                }
                spec.inventories.push_back(std::move(s));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid synth spec: ") + e.what());
    } catch (const FormatError& e) {
        throw ConfigError(std::string("invalid synth spec: ") + e.what());
    }
    return spec;
}

std::vector<SynthInventory> reference_shaped_inventories(std::size_t per_phoneme) {
    std::vector<SynthInventory> out;
    auto add = [&](std::size_t n_phonemes) {
        SynthInventory inv;
        char name[16];
        std::snprintf(name, sizeof name, "hg%03zu", out.size());
        inv.homograph = name;
        for (std::size_t p = 0; p < n_phonemes; ++p) inv.counts["p" + std::to_string(p)] = per_phoneme;
        out.push_back(std::move(inv));
    };
    for (int i = 0; i < 71; ++i) add(2);
    for (int i = 0; i < 10; ++i) add(3);
    add(4);
    return out;
}

namespace {

double min_pairwise_distance(const std::vector<Vector>& points) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < points[i].size(); ++k) {
                const double diff = points[i][k] - points[j][k];
                s += diff * diff;
            }
            best = std::min(best, std::sqrt(s));
        }
    }
    return best;
}

Vector random_direction(std::size_t dim, Rng& rng) {
    for (;;) {
        Vector v(dim);
        for (double& x : v) x = rng.normal();
        const double n = norm_of(v);
        if (n > 1e-12) {
            for (double& x : v) x /= n;
            return v;
        }
    }
}

}  // namespace

std::vector<Vector> synthetic_class_means(std::size_t dim, std::size_t n_classes, double separation, Rng& rng) {
    if (n_classes >= 2 && dim < 2 && separation > 0.0)
        throw ConfigError("dim must be at least 2 to separate multiple classes");
    std::vector<Vector> dirs;
    if (n_classes <= dim) {
        // Gram-Schmidt on Gaussian draws: orthonormal directions, so means
        // scaled by separation/sqrt(2) are exactly `separation` apart.
        while (dirs.size() < n_classes) {
            Vector v = random_direction(dim, rng);
            for (const auto& q : dirs) {
                double dot = 0.0;
                for (std::size_t k = 0; k < dim; ++k) dot += v[k] * q[k];
                for (std::size_t k = 0; k < dim; ++k) v[k] -= dot * q[k];
            }
            const double n = norm_of(v);
            if (n < 1e-6) continue;
            for (double& x : v) x /= n;
            dirs.push_back(std::move(v));
        }
        for (auto& q : dirs)
            for (double& x : q) x *= separation / std::sqrt(2.0);
    } else {
        double m = 0.0;
        while (m < 1e-6) {
            dirs.clear();
            for (std::size_t c = 0; c < n_classes; ++c) dirs.push_back(random_direction(dim, rng));
            m = min_pairwise_distance(dirs);
        }
        for (auto& q : dirs)
            for (double& x : q) x *= separation / m;
    }
    if (separation > 0.0 && n_classes >= 2) {
        // Absorb rounding so the guarantee holds exactly in floating point.
        while (min_pairwise_distance(dirs) < separation)
            for (auto& q : dirs)
                for (double& x : q) x *= 1.0 + 1e-12;
    }
    return dirs;
}

EmbeddingStore generate_synthetic_store(const SynthSpec& spec) {
    if (spec.dim == 0) throw ConfigError("dim must be positive");
    if (!std::isfinite(spec.noise_sigma) || spec.noise_sigma < 0.0)
        throw ConfigError("noise_sigma must be finite and non-negative");
    if (!std::isfinite(spec.class_separation) || spec.class_separation < 0.0)
        throw ConfigError("class_separation must be finite and non-negative");

    std::vector<EmbeddingRecord> records;
    for (std::size_t h = 0; h < spec.inventories.size(); ++h) {
        const auto& inv = spec.inventories[h];
        Rng rng(derive_seed(spec.seed, h));
        const auto means = synthetic_class_means(spec.dim, inv.counts.size(), spec.class_separation, rng);
        std::size_t c = 0;
        for (const auto& [label, count] : inv.counts) {
            for (std::size_t i = 0; i < count; ++i) {
                EmbeddingRecord r;
                r.record_id = records.size();
                r.homograph = inv.homograph;
                r.phoneme = label;
                r.vector = means[c];
                if (spec.noise_sigma > 0.0)
                    for (double& x : r.vector) x += spec.noise_sigma * rng.normal();
                records.push_back(std::move(r));
            }
            ++c;
        }
    }
    return EmbeddingStore(spec.dim, spec.pooling, spec.model_id, std::move(records));
}

Dataset synthetic_dataset(const SynthSpec& spec) {
    std::vector<HomographRecord> records;
    for (const auto& inv : spec.inventories) {
        for (const auto& [label, count] : inv.counts) {
            for (std::size_t i = 0; i < count; ++i) {
                records.push_back({0, inv.homograph, label,
                                   "synthetic " + inv.homograph + " sentence " + std::to_string(records.size())});
            }
        }
    }
    return Dataset(std::move(records));
}

}  // namespace hgd
