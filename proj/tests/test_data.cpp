#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "lia/data.hpp"
#include "lia/errors.hpp"
#include "oracles.hpp"

using namespace lia;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    const fs::path dir =
        fs::temp_directory_path() / ("lia_data_test_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

std::string write_file(const fs::path& dir, const std::string& name,
                       const std::string& content) {
    const fs::path path = dir / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("a 3-row CSV with labels {0,1} loads into 3 annotations") {
    const auto dir = temp_dir();
    const auto path = write_file(dir, "ann.csv",
                                 "instance_id,predictor_id,label\n"
                                 "a,w1,0\n"
                                 "a,w2,1\n"
                                 "b,w1,0\n");
    const auto dataset = load_dataset(path, std::nullopt, std::nullopt, LoadConfig{2});
    CHECK(dataset.annotations.size() == 3);
    CHECK(dataset.instances.size() == 2);
    CHECK(dataset.predictors.size() == 2);
    CHECK(dataset.class_catalog == std::vector<std::string>{"0", "1"});
}

TEST_CASE("an out-of-range integer label is rejected") {
    const auto dir = temp_dir();
    const auto path = write_file(dir, "ann.csv",
                                 "instance_id,predictor_id,label\na,w1,5\n");
    CHECK_THROWS_AS(load_dataset(path, std::nullopt, std::nullopt, LoadConfig{2}),
                    ValidationError);
}

TEST_CASE("string labels get first-seen catalog order") {
    const auto dir = temp_dir();
    const auto path = write_file(dir, "ann.csv",
                                 "instance_id,predictor_id,label\n"
                                 "a,w1,cat\n"
                                 "a,w2,dog\n"
                                 "b,w1,dog\n");
    const auto dataset = load_dataset(path, std::nullopt, std::nullopt, LoadConfig{2});
    CHECK(dataset.class_catalog == std::vector<std::string>{"cat", "dog"});
    CHECK(dataset.annotations[0].label == 0);
    CHECK(dataset.annotations[1].label == 1);
    const auto extra = write_file(dir, "ann3.csv",
                                  "instance_id,predictor_id,label\n"
                                  "a,w1,cat\na,w2,dog\na,w3,bird\n");
    CHECK_THROWS_AS(load_dataset(extra, std::nullopt, std::nullopt, LoadConfig{2}),
                    ValidationError);
}

TEST_CASE("ragged feature vectors are rejected") {
    const auto dir = temp_dir();
    const auto ann = write_file(dir, "ann.csv",
                                "instance_id,predictor_id,label\na,w1,0\nb,w1,1\n");
    const auto feats = write_file(dir, "feat.csv",
                                  "instance_id,f_0,f_1\na,1.0,2.0\nb,3.0\n");
    CHECK_THROWS_AS(load_dataset(ann, feats, std::nullopt, LoadConfig{2}), ParseError);
}

TEST_CASE("duplicate (instance, predictor) pairs are rejected") {
    const auto dir = temp_dir();
    const auto path = write_file(dir, "ann.csv",
                                 "instance_id,predictor_id,label\na,w1,0\na,w1,1\n");
    CHECK_THROWS_AS(load_dataset(path, std::nullopt, std::nullopt, LoadConfig{2}),
                    ValidationError);
}

TEST_CASE("malformed rows name the offending line") {
    const auto dir = temp_dir();
    const auto path = write_file(dir, "ann.csv",
                                 "instance_id,predictor_id,label,p_0,p_1\n"
                                 "a,w1,0,0.9,0.1\n"
                                 "b,w1,1,oops,0.4\n");
    try {
        load_dataset(path, std::nullopt, std::nullopt, LoadConfig{2});
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(err.line == 3);
    }
}

TEST_CASE("soft labels must sit on the simplex and agree with the hard label") {
    const auto dir = temp_dir();
    const auto good = write_file(dir, "good.csv",
                                 "instance_id,predictor_id,label,p_0,p_1\n"
                                 "a,w1,0,0.9,0.1\n");
    const auto dataset = load_dataset(good, std::nullopt, std::nullopt, LoadConfig{2});
    REQUIRE(dataset.annotations[0].soft_label.has_value());
    CHECK((*dataset.annotations[0].soft_label)[0] == doctest::Approx(0.9));

    const auto bad_sum = write_file(dir, "bad_sum.csv",
                                    "instance_id,predictor_id,label,p_0,p_1\n"
                                    "a,w1,0,0.9,0.3\n");
    CHECK_THROWS_AS(load_dataset(bad_sum, std::nullopt, std::nullopt, LoadConfig{2}),
                    ValidationError);
    const auto bad_argmax = write_file(dir, "bad_argmax.csv",
                                       "instance_id,predictor_id,label,p_0,p_1\n"
                                       "a,w1,0,0.2,0.8\n");
    CHECK_THROWS_AS(load_dataset(bad_argmax, std::nullopt, std::nullopt, LoadConfig{2}),
                    ValidationError);
}

TEST_CASE("JSON mirrors load like their CSV counterparts") {
    const auto dir = temp_dir();
    const auto ann = write_file(dir, "ann.json",
                                R"([{"instance_id":"a","predictor_id":"w1","label":0},
                                    {"instance_id":"a","predictor_id":"w2","label":1},
                                    {"instance_id":"b","predictor_id":"w1","label":1}])");
    const auto feats = write_file(dir, "feat.json",
                                  R"([{"instance_id":"a","f_0":1.5,"f_1":-2.0},
                                      {"instance_id":"b","f_0":0.0,"f_1":3.25}])");
    const auto dataset = load_dataset(ann, feats, std::nullopt, LoadConfig{2});
    CHECK(dataset.annotations.size() == 3);
    REQUIRE(dataset.instances[0].features.has_value());
    CHECK((*dataset.instances[0].features)[1] == doctest::Approx(-2.0));
}

TEST_CASE("write then load round-trips a dataset") {
    const auto dir = temp_dir();
    AnnotationDataset original = oracles::make_dataset(
        2, 3, 2, {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {2, 1, 0}},
        {{0.125, -3.75}, {1.0 / 3.0, 2.0}, {9.87654321012345678, 0.0}});
    const auto ann = (dir / "ann.csv").string();
    const auto feats = (dir / "feat.csv").string();
    save_dataset(original, ann, feats);
    const auto reloaded = load_dataset(ann, feats, std::nullopt, LoadConfig{2});
    REQUIRE(reloaded.instances.size() == original.instances.size());
    REQUIRE(reloaded.annotations.size() == original.annotations.size());
    for (std::size_t i = 0; i < original.instances.size(); ++i) {
        CHECK(reloaded.instances[i].id == original.instances[i].id);
        for (std::size_t d = 0; d < 2; ++d)
            CHECK(std::abs((*reloaded.instances[i].features)[d] -
                           (*original.instances[i].features)[d]) <= 1e-12);
    }
    for (std::size_t a = 0; a < original.annotations.size(); ++a) {
        CHECK(reloaded.annotations[a].instance == original.annotations[a].instance);
        CHECK(reloaded.annotations[a].predictor == original.annotations[a].predictor);
        CHECK(reloaded.annotations[a].label == original.annotations[a].label);
    }
}

TEST_CASE("ground truth loads against the dataset catalog") {
    const auto dir = temp_dir();
    const auto ann = write_file(dir, "ann.csv",
                                "instance_id,predictor_id,label\na,w1,0\nb,w1,1\n");
    const auto truth_path = write_file(dir, "truth.csv", "instance_id,label\na,1\nb,0\n");
    const auto dataset = load_dataset(ann, std::nullopt, std::nullopt, LoadConfig{2});
    const auto truth = load_ground_truth(truth_path, dataset);
    CHECK(truth.labels[0] == 1);
    CHECK(truth.labels[1] == 0);
    const auto bad = write_file(dir, "bad_truth.csv", "instance_id,label\nzz,0\n");
    CHECK_THROWS_AS(load_ground_truth(bad, dataset), ValidationError);
}

TEST_CASE("features-only instances survive with no annotations") {
    const auto dir = temp_dir();
    const auto ann = write_file(dir, "ann.csv",
                                "instance_id,predictor_id,label\na,w1,0\n");
    const auto feats = write_file(dir, "feat.csv",
                                  "instance_id,f_0\na,1.0\nunlabeled,2.0\n");
    const auto dataset = load_dataset(ann, feats, std::nullopt, LoadConfig{2});
    CHECK(dataset.instances.size() == 2);
    CHECK(dataset.annotations_of[1].empty());
}

TEST_CASE("multi-label ids split into base and task") {
    const auto dir = temp_dir();
    const auto ann = write_file(dir, "ann.csv",
                                "instance_id,predictor_id,label\n"
                                "s1::causes,w1,0\n"
                                "s1::treats,w1,1\n"
                                "s2::causes,w2,1\n");
    const auto feats = write_file(dir, "feat.csv", "instance_id,f_0\ns1,1.0\ns2,2.0\n");
    LoadConfig config{2};
    config.multi_label = true;
    const auto dataset = load_dataset(ann, feats, std::nullopt, config);
    CHECK(dataset.label_catalog == std::vector<std::string>{"causes", "treats"});
    CHECK(dataset.instances[0].task == 0);
    CHECK(dataset.instances[1].task == 1);
    // Shared base features reach both task instances.
    CHECK((*dataset.instances[0].features)[0] == doctest::Approx(1.0));
    CHECK((*dataset.instances[1].features)[0] == doctest::Approx(1.0));
}

TEST_CASE("subsampling below the cap is a no-op") {
    const auto dataset = oracles::make_dataset(
        2, 2, 3, {{0, 0, 0}, {0, 1, 1}, {1, 0, 0}, {1, 1, 0}, {1, 2, 1}});
    const auto result = subsample_redundancy(dataset, 5, 42);
    CHECK(result.annotations.size() == dataset.annotations.size());
}

TEST_CASE("subsampling keeps exactly the cap per instance") {
    const auto dataset = oracles::make_dataset(
        2, 1, 5, {{0, 0, 0}, {0, 1, 1}, {0, 2, 0}, {0, 3, 1}, {0, 4, 0}});
    const auto result = subsample_redundancy(dataset, 2, 7);
    CHECK(result.annotations.size() == 2);
    // Retained annotations are a subset of the originals.
    for (const auto& annotation : result.annotations) {
        bool found = false;
        for (const auto& original : dataset.annotations)
            if (original.predictor == annotation.predictor &&
                original.instance == annotation.instance &&
                original.label == annotation.label)
                found = true;
        CHECK(found);
    }
}

TEST_CASE("subsampling is deterministic per seed and uniform across seeds") {
    const auto dataset = oracles::make_dataset(
        2, 1, 5, {{0, 0, 0}, {0, 1, 1}, {0, 2, 0}, {0, 3, 1}, {0, 4, 0}});
    const auto a = subsample_redundancy(dataset, 2, 123);
    const auto b = subsample_redundancy(dataset, 2, 123);
    REQUIRE(a.annotations.size() == b.annotations.size());
    for (std::size_t i = 0; i < a.annotations.size(); ++i)
        CHECK(a.annotations[i].predictor == b.annotations[i].predictor);

    std::vector<int> kept(5, 0);
    const int trials = 4000;
    for (int seed = 0; seed < trials; ++seed) {
        const auto sampled = subsample_redundancy(dataset, 2, seed);
        for (const auto& annotation : sampled.annotations)
            kept[annotation.predictor] += 1;
    }
    for (int j = 0; j < 5; ++j) {
        const double frequency = static_cast<double>(kept[j]) / trials;
        CHECK(std::abs(frequency - 0.4) < 0.05);
    }
}

TEST_CASE("train/eval split partitions instances") {
    std::vector<std::tuple<std::size_t, std::size_t, int>> annotations;
    for (std::size_t i = 0; i < 10; ++i) annotations.push_back({i, 0, 0});
    const auto dataset = oracles::make_dataset(2, 10, 1, annotations);
    const auto [train, eval] = train_eval_split(dataset, 0.5, 9);
    CHECK(train.instances.size() == 5);
    CHECK(eval.instances.size() == 5);
    std::set<std::string> ids;
    for (const auto& instance : train.instances) ids.insert(instance.id);
    for (const auto& instance : eval.instances) ids.insert(instance.id);
    CHECK(ids.size() == 10);  // disjoint union = original set

    const auto [train2, eval2] = train_eval_split(dataset, 0.5, 9);
    for (std::size_t i = 0; i < train.instances.size(); ++i)
        CHECK(train.instances[i].id == train2.instances[i].id);
}
