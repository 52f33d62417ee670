#include "lia/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lia/errors.hpp"
#include "lia/rng.hpp"

namespace lia {

namespace {

using nlohmann::json;

bool ends_with(const std::string& text, const std::string& suffix) {
    return text.size() >= suffix.size() &&
           text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& text, std::size_t line) {
    try {
        std::size_t consumed = 0;
        const double value = std::stod(text, &consumed);
        if (consumed != text.size()) throw ParseError("trailing characters in number", line);
        return value;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("malformed number '" + text + "'", line);
    }
}

bool is_integer_literal(const std::string& text) {
    if (text.empty()) return false;
    std::size_t start = (text[0] == '-' || text[0] == '+') ? 1 : 0;
    if (start == text.size()) return false;
    for (std::size_t i = start; i < text.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    return true;
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json parsed;
    try {
        in >> parsed;
    } catch (const std::exception& err) {
        throw ParseError(path + ": " + err.what());
    }
    if (!parsed.is_array()) throw ParseError(path + ": expected a JSON array of records");
    return parsed;
}

std::string json_string_field(const json& record, const char* key, const std::string& path) {
    if (!record.contains(key)) throw ParseError(path + ": record missing field " + key);
    const json& value = record.at(key);
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<long long>());
    throw ParseError(path + ": field " + key + " must be a string or integer");
}

struct AnnotationRecord {
    std::string instance_id;
    std::string predictor_id;
    std::string label;
    std::optional<std::vector<double>> soft;
    std::size_t line = 0;
};

std::vector<AnnotationRecord> read_annotation_records(const std::string& path,
                                                      int num_classes) {
    std::vector<AnnotationRecord> records;
    if (ends_with(path, ".json")) {
        const json parsed = parse_json_file(path);
        for (const json& record : parsed) {
            AnnotationRecord rec;
            rec.instance_id = json_string_field(record, "instance_id", path);
            rec.predictor_id = json_string_field(record, "predictor_id", path);
            rec.label = json_string_field(record, "label", path);
            if (record.contains("p_0")) {
                std::vector<double> soft(num_classes, 0.0);
                for (int k = 0; k < num_classes; ++k) {
                    const std::string key = "p_" + std::to_string(k);
                    if (!record.contains(key))
                        throw ParseError(path + ": soft-label columns must be all-or-none");
                    soft[k] = record.at(key).get<double>();
                }
                rec.soft = std::move(soft);
            }
            records.push_back(std::move(rec));
        }
        return records;
    }

    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError("empty annotations file: " + path, 1);
    const auto header = split_csv(lines[0]);
    if (header.size() < 3 || header[0] != "instance_id" || header[1] != "predictor_id" ||
        header[2] != "label")
        throw ParseError("annotations header must be instance_id,predictor_id,label[,p_0,...]", 1);
    const bool has_soft = header.size() > 3;
    if (has_soft) {
        if (header.size() != static_cast<std::size_t>(3 + num_classes))
            throw ParseError("expected " + std::to_string(num_classes) +
                                 " soft-label columns",
                             1);
        for (int k = 0; k < num_classes; ++k)
            if (header[3 + k] != "p_" + std::to_string(k))
                throw ParseError("soft-label columns must be named p_0..p_" +
                                     std::to_string(num_classes - 1),
                                 1);
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv(lines[i]);
        if (fields.size() != header.size())
            throw ParseError("row has " + std::to_string(fields.size()) +
                                 " fields, expected " + std::to_string(header.size()),
                             i + 1);
        AnnotationRecord rec;
        rec.instance_id = fields[0];
        rec.predictor_id = fields[1];
        rec.label = fields[2];
        rec.line = i + 1;
        if (has_soft) {
            std::vector<double> soft(num_classes);
            for (int k = 0; k < num_classes; ++k) soft[k] = parse_double(fields[3 + k], i + 1);
            rec.soft = std::move(soft);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

/// id -> value-vector files (features, predictor representations).
std::vector<std::pair<std::string, std::vector<double>>> read_vector_records(
    const std::string& path, const std::string& id_column, const std::string& value_prefix) {
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    if (ends_with(path, ".json")) {
        const json parsed = parse_json_file(path);
        for (const json& record : parsed) {
            std::vector<double> values;
            for (std::size_t k = 0; record.contains(value_prefix + std::to_string(k)); ++k)
                values.push_back(record.at(value_prefix + std::to_string(k)).get<double>());
            rows.emplace_back(json_string_field(record, id_column.c_str(), path),
                              std::move(values));
        }
        return rows;
    }
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError("empty file: " + path, 1);
    const auto header = split_csv(lines[0]);
    if (header.empty() || header[0] != id_column)
        throw ParseError("header must start with " + id_column, 1);
    for (std::size_t k = 1; k < header.size(); ++k)
        if (header[k] != value_prefix + std::to_string(k - 1))
            throw ParseError("value columns must be named " + value_prefix + "0.." , 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv(lines[i]);
        if (fields.size() != header.size())
            throw ParseError("row has " + std::to_string(fields.size()) +
                                 " fields, expected " + std::to_string(header.size()),
                             i + 1);
        std::vector<double> values(fields.size() - 1);
        for (std::size_t k = 1; k < fields.size(); ++k)
            values[k - 1] = parse_double(fields[k], i + 1);
        rows.emplace_back(fields[0], std::move(values));
    }
    return rows;
}

/// Maps external label strings to class indices. Integer labels act as
/// direct indices; anything else gets first-seen order (or the fixed
/// catalog from the config when provided).
struct LabelResolver {
    int num_classes;
    std::vector<std::string> catalog;
    bool fixed = false;

    static LabelResolver create(const LoadConfig& config,
                                const std::vector<AnnotationRecord>& records) {
        LabelResolver resolver;
        resolver.num_classes = config.num_classes;
        if (config.class_catalog) {
            resolver.catalog = *config.class_catalog;
            resolver.fixed = true;
            if (resolver.catalog.size() > static_cast<std::size_t>(config.num_classes))
                throw ConfigError("class catalog larger than num_classes");
            return resolver;
        }
        bool all_integer = true;
        for (const auto& rec : records)
            if (!is_integer_literal(rec.label)) {
                all_integer = false;
                break;
            }
        if (all_integer) {
            for (int k = 0; k < config.num_classes; ++k)
                resolver.catalog.push_back(std::to_string(k));
            resolver.fixed = true;
        }
        return resolver;
    }

    int resolve(const std::string& label, std::size_t line) {
        const auto found = std::find(catalog.begin(), catalog.end(), label);
        if (found != catalog.end()) return static_cast<int>(found - catalog.begin());
        if (fixed) {
            if (line > 0)
                throw ValidationError("label '" + label + "' out of range (line " +
                                      std::to_string(line) + ")");
            throw ValidationError("label '" + label + "' out of range");
        }
        if (catalog.size() == static_cast<std::size_t>(num_classes))
            throw ValidationError("more than " + std::to_string(num_classes) +
                                  " distinct labels; label '" + label + "' out of range");
        catalog.push_back(label);
        return static_cast<int>(catalog.size()) - 1;
    }
};

std::pair<std::string, std::optional<std::string>> split_task(const std::string& id,
                                                              bool multi_label) {
    if (!multi_label) return {id, std::nullopt};
    const auto pos = id.rfind("::");
    if (pos == std::string::npos || pos == 0 || pos + 2 >= id.size())
        throw ValidationError("multi-label instance id must look like <base>::<task>: " + id);
    return {id.substr(0, pos), id.substr(pos + 2)};
}

void append_double(std::string& out, double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    out += buffer;
}

}  // namespace

std::optional<std::size_t> AnnotationDataset::feature_dim() const {
    for (const auto& instance : instances)
        if (instance.features) return instance.features->size();
    return std::nullopt;
}

std::optional<std::size_t> AnnotationDataset::predictor_repr_dim() const {
    for (const auto& predictor : predictors)
        if (predictor.representation) return predictor.representation->size();
    return std::nullopt;
}

std::string AnnotationDataset::class_name(int label) const {
    if (label >= 0 && static_cast<std::size_t>(label) < class_catalog.size())
        return class_catalog[label];
    return std::to_string(label);
}

void AnnotationDataset::rebuild_index() {
    instance_index.clear();
    predictor_index.clear();
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (!instance_index.emplace(instances[i].id, i).second)
            throw ValidationError("duplicate instance id: " + instances[i].id);
    for (std::size_t j = 0; j < predictors.size(); ++j)
        if (!predictor_index.emplace(predictors[j].id, j).second)
            throw ValidationError("duplicate predictor id: " + predictors[j].id);
    annotations_of.assign(instances.size(), {});
    for (std::size_t a = 0; a < annotations.size(); ++a) {
        if (annotations[a].instance >= instances.size() ||
            annotations[a].predictor >= predictors.size())
            throw ValidationError("annotation references unknown instance or predictor");
        annotations_of[annotations[a].instance].push_back(a);
    }
}

void AnnotationDataset::validate() const {
    if (num_classes < 2) throw ValidationError("num_classes must be >= 2");
    if (instance_index.size() != instances.size() ||
        annotations_of.size() != instances.size())
        throw ValidationError("dataset index out of date; call rebuild_index()");

    const auto feat_dim = feature_dim();
    for (const auto& instance : instances) {
        if (feat_dim.has_value() != instance.features.has_value())
            throw ValidationError("instances must all have features or all have none");
        if (instance.features && instance.features->size() != *feat_dim)
            throw ValidationError("ragged feature vectors (instance " + instance.id + ")");
        if (instance.features)
            for (double v : *instance.features)
                if (!std::isfinite(v))
                    throw ValidationError("non-finite feature (instance " + instance.id + ")");
        if (instance.task && *instance.task >= num_tasks())
            throw ValidationError("instance task index out of range: " + instance.id);
        if (!label_catalog.empty() && !instance.task)
            throw ValidationError("multi-label dataset requires a task per instance: " +
                                  instance.id);
    }
    const auto repr_dim = predictor_repr_dim();
    for (const auto& predictor : predictors) {
        if (repr_dim.has_value() != predictor.representation.has_value())
            throw ValidationError("predictors must all have representations or none");
        if (predictor.representation && predictor.representation->size() != *repr_dim)
            throw ValidationError("ragged predictor representations (" + predictor.id + ")");
    }

    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& annotation : annotations) {
        if (annotation.instance >= instances.size() ||
            annotation.predictor >= predictors.size())
            throw ValidationError("annotation references unknown instance or predictor");
        if (annotation.label < 0 || annotation.label >= num_classes)
            throw ValidationError("annotation label out of range");
        if (!seen.emplace(annotation.instance, annotation.predictor).second)
            throw ValidationError("duplicate (instance, predictor) pair: " +
                                  instances[annotation.instance].id + ", " +
                                  predictors[annotation.predictor].id);
        if (annotation.soft_label) {
            const auto& soft = *annotation.soft_label;
            if (soft.size() != static_cast<std::size_t>(num_classes))
                throw ValidationError("soft label has wrong length");
            double total = 0.0;
            double top = -1.0;
            for (double p : soft) {
                if (!(p >= 0.0))
                    throw ValidationError("soft label entries must be non-negative");
                total += p;
                top = std::max(top, p);
            }
            if (std::abs(total - 1.0) > 1e-6)
                throw ValidationError("soft label does not sum to 1");
            if (soft[annotation.label] < top - 1e-12)
                throw ValidationError("soft label argmax disagrees with hard label");
        }
    }
    const bool any_soft = std::any_of(annotations.begin(), annotations.end(),
                                      [](const Annotation& a) { return a.soft_label.has_value(); });
    const bool all_soft = std::all_of(annotations.begin(), annotations.end(),
                                      [](const Annotation& a) { return a.soft_label.has_value(); });
    if (any_soft && !all_soft)
        throw ValidationError("soft labels must be present on all annotations or none");
}

AnnotationDataset load_dataset(const std::string& annotations_path,
                               const std::optional<std::string>& features_path,
                               const std::optional<std::string>& predictors_path,
                               const LoadConfig& config) {
    if (config.num_classes < 2) throw ConfigError("num_classes must be >= 2");

    const auto records = read_annotation_records(annotations_path, config.num_classes);
    LabelResolver resolver = LabelResolver::create(config, records);

    AnnotationDataset dataset;
    dataset.num_classes = config.num_classes;

    // Instance universe: annotation ids first (first-seen order), then ids
    // that only appear in the features file, so unlabeled instances survive.
    auto intern_instance = [&](const std::string& id) -> std::size_t {
        const auto found = dataset.instance_index.find(id);
        if (found != dataset.instance_index.end()) return found->second;
        const auto [base, task_name] = split_task(id, config.multi_label);
        Instance instance;
        instance.id = id;
        if (task_name) {
            auto task_it = std::find(dataset.label_catalog.begin(),
                                     dataset.label_catalog.end(), *task_name);
            if (task_it == dataset.label_catalog.end()) {
                dataset.label_catalog.push_back(*task_name);
                task_it = std::prev(dataset.label_catalog.end());
            }
            instance.task = static_cast<std::size_t>(task_it - dataset.label_catalog.begin());
        }
        dataset.instances.push_back(std::move(instance));
        dataset.instance_index.emplace(id, dataset.instances.size() - 1);
        return dataset.instances.size() - 1;
    };
    auto intern_predictor = [&](const std::string& id) -> std::size_t {
        const auto found = dataset.predictor_index.find(id);
        if (found != dataset.predictor_index.end()) return found->second;
        dataset.predictors.push_back(Predictor{id, std::nullopt});
        dataset.predictor_index.emplace(id, dataset.predictors.size() - 1);
        return dataset.predictors.size() - 1;
    };

    for (const auto& rec : records) {
        Annotation annotation;
        annotation.instance = intern_instance(rec.instance_id);
        annotation.predictor = intern_predictor(rec.predictor_id);
        annotation.label = resolver.resolve(rec.label, rec.line);
        annotation.soft_label = rec.soft;
        dataset.annotations.push_back(std::move(annotation));
    }

    if (features_path) {
        const auto rows = read_vector_records(*features_path, "instance_id", "f_");
        std::unordered_map<std::string, const std::vector<double>*> table;
        for (const auto& [id, values] : rows) {
            if (!table.emplace(id, &values).second)
                throw ValidationError("duplicate feature row for instance " + id);
        }
        // Feature-only ids extend the instance universe.
        for (const auto& [id, values] : rows) {
            (void)values;
            if (!config.multi_label && !dataset.instance_index.count(id)) intern_instance(id);
        }
        for (auto& instance : dataset.instances) {
            auto found = table.find(instance.id);
            if (found == table.end() && config.multi_label)
                found = table.find(split_task(instance.id, true).first);
            if (found == table.end())
                throw ValidationError("missing features for instance " + instance.id);
            instance.features = *found->second;
        }
    }
    if (predictors_path) {
        const auto rows = read_vector_records(*predictors_path, "predictor_id", "r_");
        std::unordered_map<std::string, const std::vector<double>*> table;
        for (const auto& [id, values] : rows)
            if (!table.emplace(id, &values).second)
                throw ValidationError("duplicate representation row for predictor " + id);
        for (const auto& [id, values] : rows) {
            (void)values;
            if (!dataset.predictor_index.count(id)) intern_predictor(id);
        }
        for (auto& predictor : dataset.predictors) {
            const auto found = table.find(predictor.id);
            if (found == table.end())
                throw ValidationError("missing representation for predictor " + predictor.id);
            predictor.representation = *found->second;
        }
    }

    dataset.class_catalog = resolver.catalog;
    dataset.rebuild_index();
    dataset.validate();
    return dataset;
}

GroundTruth load_ground_truth(const std::string& path, const AnnotationDataset& dataset) {
    GroundTruth truth;
    truth.labels.assign(dataset.instances.size(), std::nullopt);
    auto assign = [&](const std::string& id, const std::string& label, std::size_t line) {
        const auto found = dataset.instance_index.find(id);
        if (found == dataset.instance_index.end())
            throw ValidationError("ground truth references unknown instance " + id);
        const auto in_catalog = std::find(dataset.class_catalog.begin(),
                                          dataset.class_catalog.end(), label);
        if (in_catalog == dataset.class_catalog.end())
            throw ValidationError("ground-truth label '" + label + "' not in class catalog" +
                                  (line ? " (line " + std::to_string(line) + ")" : ""));
        truth.labels[found->second] =
            static_cast<int>(in_catalog - dataset.class_catalog.begin());
    };
    if (ends_with(path, ".json")) {
        for (const json& record : parse_json_file(path))
            assign(json_string_field(record, "instance_id", path),
                   json_string_field(record, "label", path), 0);
        return truth;
    }
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError("empty ground-truth file: " + path, 1);
    const auto header = split_csv(lines[0]);
    if (header.size() != 2 || header[0] != "instance_id" || header[1] != "label")
        throw ParseError("ground-truth header must be instance_id,label", 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv(lines[i]);
        if (fields.size() != 2) throw ParseError("expected 2 fields", i + 1);
        assign(fields[0], fields[1], i + 1);
    }
    return truth;
}

void save_dataset(const AnnotationDataset& dataset, const std::string& annotations_path,
                  const std::optional<std::string>& features_path,
                  const std::optional<std::string>& predictors_path) {
    const bool soft = !dataset.annotations.empty() &&
                      dataset.annotations.front().soft_label.has_value();
    {
        std::ofstream out(annotations_path);
        if (!out) throw ValidationError("cannot write file: " + annotations_path);
        std::string line = "instance_id,predictor_id,label";
        for (int k = 0; soft && k < dataset.num_classes; ++k)
            line += ",p_" + std::to_string(k);
        out << line << '\n';
        for (const auto& annotation : dataset.annotations) {
            line = dataset.instances[annotation.instance].id + "," +
                   dataset.predictors[annotation.predictor].id + "," +
                   dataset.class_name(annotation.label);
            if (soft)
                for (double p : *annotation.soft_label) {
                    line += ',';
                    append_double(line, p);
                }
            out << line << '\n';
        }
    }
    if (features_path) {
        const auto dim = dataset.feature_dim();
        if (!dim) throw ValidationError("dataset has no features to write");
        std::ofstream out(*features_path);
        if (!out) throw ValidationError("cannot write file: " + *features_path);
        std::string line = "instance_id";
        for (std::size_t k = 0; k < *dim; ++k) line += ",f_" + std::to_string(k);
        out << line << '\n';
        for (const auto& instance : dataset.instances) {
            line = instance.id;
            for (double v : *instance.features) {
                line += ',';
                append_double(line, v);
            }
            out << line << '\n';
        }
    }
    if (predictors_path) {
        const auto dim = dataset.predictor_repr_dim();
        if (!dim) throw ValidationError("dataset has no predictor representations to write");
        std::ofstream out(*predictors_path);
        if (!out) throw ValidationError("cannot write file: " + *predictors_path);
        std::string line = "predictor_id";
        for (std::size_t k = 0; k < *dim; ++k) line += ",r_" + std::to_string(k);
        out << line << '\n';
        for (const auto& predictor : dataset.predictors) {
            line = predictor.id;
            for (double v : *predictor.representation) {
                line += ',';
                append_double(line, v);
            }
            out << line << '\n';
        }
    }
}

void save_ground_truth(const LabeledDataset& labeled, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "instance_id,label\n";
    for (std::size_t i = 0; i < labeled.data.instances.size(); ++i)
        if (labeled.truth.labels[i])
            out << labeled.data.instances[i].id << ','
                << labeled.data.class_name(*labeled.truth.labels[i]) << '\n';
}

AnnotationDataset subsample_redundancy(const AnnotationDataset& dataset,
                                       std::size_t max_per_instance, std::uint64_t seed) {
    if (max_per_instance < 1) throw ConfigError("max_per_instance must be >= 1");
    Rng rng(seed);
    std::vector<char> keep(dataset.annotations.size(), 0);
    for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
        std::vector<std::size_t> pool = dataset.annotations_of[i];
        if (pool.size() <= max_per_instance) {
            for (std::size_t a : pool) keep[a] = 1;
            continue;
        }
        // Partial Fisher-Yates: the first max_per_instance slots end up as a
        // uniform sample without replacement.
        for (std::size_t k = 0; k < max_per_instance; ++k) {
            const std::size_t j =
                k + static_cast<std::size_t>(uniform_index(rng, pool.size() - k));
            std::swap(pool[k], pool[j]);
            keep[pool[k]] = 1;
        }
    }
    AnnotationDataset result = dataset;
    result.annotations.clear();
    for (std::size_t a = 0; a < dataset.annotations.size(); ++a)
        if (keep[a]) result.annotations.push_back(dataset.annotations[a]);
    result.rebuild_index();
    return result;
}

LabeledDataset subsample_redundancy(const LabeledDataset& labeled,
                                    std::size_t max_per_instance, std::uint64_t seed) {
    return {subsample_redundancy(labeled.data, max_per_instance, seed), labeled.truth};
}

namespace {

AnnotationDataset select_instances(const AnnotationDataset& dataset,
                                   const std::vector<std::size_t>& selected) {
    AnnotationDataset result;
    result.num_classes = dataset.num_classes;
    result.class_catalog = dataset.class_catalog;
    result.label_catalog = dataset.label_catalog;
    result.predictors = dataset.predictors;
    std::vector<std::ptrdiff_t> remap(dataset.instances.size(), -1);
    for (std::size_t i : selected) {
        remap[i] = static_cast<std::ptrdiff_t>(result.instances.size());
        result.instances.push_back(dataset.instances[i]);
    }
    for (const auto& annotation : dataset.annotations) {
        if (remap[annotation.instance] < 0) continue;
        Annotation copy = annotation;
        copy.instance = static_cast<std::size_t>(remap[annotation.instance]);
        result.annotations.push_back(std::move(copy));
    }
    result.rebuild_index();
    return result;
}

}  // namespace

std::pair<AnnotationDataset, AnnotationDataset> train_eval_split(
    const AnnotationDataset& dataset, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("split fraction must lie in (0, 1)");
    const std::size_t n = dataset.instances.size();
    if (n < 2) throw ConfigError("cannot split fewer than 2 instances");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    shuffle(order, rng);
    std::size_t train_count = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(n)));
    train_count = std::clamp<std::size_t>(train_count, 1, n - 1);
    std::vector<std::size_t> train_ids(order.begin(), order.begin() + train_count);
    std::vector<std::size_t> eval_ids(order.begin() + train_count, order.end());
    std::sort(train_ids.begin(), train_ids.end());
    std::sort(eval_ids.begin(), eval_ids.end());
    return {select_instances(dataset, train_ids), select_instances(dataset, eval_ids)};
}

std::pair<LabeledDataset, LabeledDataset> train_eval_split(const LabeledDataset& labeled,
                                                           double fraction,
                                                           std::uint64_t seed) {
    auto [train, eval] = train_eval_split(labeled.data, fraction, seed);
    GroundTruth train_truth, eval_truth;
    train_truth.labels.reserve(train.instances.size());
    eval_truth.labels.reserve(eval.instances.size());
    for (const auto& instance : train.instances)
        train_truth.labels.push_back(
            labeled.truth.labels[labeled.data.instance_index.at(instance.id)]);
    for (const auto& instance : eval.instances)
        eval_truth.labels.push_back(
            labeled.truth.labels[labeled.data.instance_index.at(instance.id)]);
    return {{std::move(train), std::move(train_truth)},
            {std::move(eval), std::move(eval_truth)}};
}

}  // namespace lia
