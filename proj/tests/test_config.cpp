#include "brc/config.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace brc;

namespace {

std::string message_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

nlohmann::json headline_json() { return config_to_json(bundled_config("swing-D0.39")); }

}  // namespace

TEST(Bundle, ReferenceValues) {
    const auto c = bundled_config("swing-D0.39");
    ASSERT_TRUE(c.machine.hyperparams);
    EXPECT_EQ(*c.machine.hyperparams, (Hyperparams{500, 0.480, 0.033, 2.917, 0.574, 3.458e-4, 2}));
    EXPECT_EQ(c.machine.beta, 10.0);
    EXPECT_EQ(c.dataset.per_label, 3u);
    EXPECT_EQ(c.dataset.series_length, 1500u);
    EXPECT_EQ(c.inference.guide_length, 10u);
    EXPECT_EQ(c.grid.nx, 100u);

    const auto chua = bundled_config("chua");
    EXPECT_EQ(*chua.machine.hyperparams, (Hyperparams{500, 0.7691, 0.300, 2.763, 0.424, 1.1e-3, 3}));
    EXPECT_EQ(chua.inference.classification, (ClassificationSpec{10000, 1000}));

    const auto duffing = bundled_config("duffing");
    EXPECT_EQ(*duffing.machine.hyperparams, (Hyperparams{500, 0.995, 0.501, 0.607, 0.631, 1.9e-3, 2}));
    EXPECT_EQ(duffing.inference.classification.tail, 100u);

    const auto reduced = bundled_config("swing-D0.39-reduced");
    EXPECT_EQ(reduced.dataset.per_label, 2u);
    ASSERT_TRUE(reduced.noise_sweep);
    EXPECT_EQ(reduced.noise_sweep->amplitudes, (std::vector<double>{0.0, 1e-5, 1e-4, 1e-3, 2e-3, 1e-2, 1e-1}));

    const auto fish = bundled_config("swing-D0.06-noisy");
    EXPECT_EQ(std::get<SwingParams>(fish.system).noise_amplitude, 1e-2);
    EXPECT_EQ(fish.machine.beta, 30.0);
    EXPECT_EQ(bundle_configs().size(), 7u);
    EXPECT_THROW(bundled_config("nope"), ConfigError);
}

TEST(Config, RoundTrip) {
    for (const auto& c : bundle_configs()) {
        const auto back = parse_config(serialize_config(c));
        EXPECT_EQ(back, c) << c.experiment_id;
        EXPECT_EQ(serialize_config(back), serialize_config(c));
    }
}

TEST(Config, ShippedFilesMatchTheBundle) {
    for (const auto& c : bundle_configs()) {
        const auto path = std::filesystem::path(BRC_SOURCE_DIR) / "configs" / (c.experiment_id + ".json");
        ASSERT_TRUE(std::filesystem::exists(path)) << path;
        EXPECT_EQ(load_config(path.string()), c) << path;
    }
}

TEST(Config, ErrorsNameTheField) {
    auto j = headline_json();
    j["machine"]["hyperparams"]["lambda"] = "big";
    EXPECT_NE(message_of(j.dump()).find("machine.hyperparams.lambda"), std::string::npos);

    j = headline_json();
    j["grid"]["colour"] = 1;
    EXPECT_NE(message_of(j.dump()).find("grid.colour: unknown field"), std::string::npos);

    j = headline_json();
    j["dataset"].erase("per_label");
    EXPECT_NE(message_of(j.dump()).find("dataset.per_label: missing"), std::string::npos);

    j = headline_json();
    j["dataset"]["labels"][1] = "sideways";
    EXPECT_NE(message_of(j.dump()).find("dataset.labels[1]"), std::string::npos);

    j = headline_json();
    j["machine"]["hyperparams"]["alpha_leak"] = 1.5;
    EXPECT_NE(message_of(j.dump()).find("machine.hyperparams"), std::string::npos);

    j = headline_json();
    j["search"]["validation_horizon"] = 5000;
    EXPECT_NE(message_of(j.dump()).find("search.validation_horizon"), std::string::npos);

    EXPECT_NE(message_of("{not json").find("not valid JSON"), std::string::npos);
}

TEST(Config, OptionalSectionsTakeDefaults) {
    auto j = headline_json();
    j.erase("search");
    j["inference"].erase("batch");
    const auto c = config_from_json(j);
    EXPECT_EQ(c.search, SearchSection{});
    EXPECT_EQ(c.inference.batch, InferenceSpec{}.batch);
}

TEST(Config, DigestTracksContent) {
    auto c = bundled_config("swing-D0.39");
    const auto d0 = config_digest(c);
    EXPECT_EQ(d0.size(), 16u);
    EXPECT_EQ(config_digest(parse_config(serialize_config(c))), d0);
    c.master_seed = 2;
    EXPECT_NE(config_digest(c), d0);
}

TEST(Config, OutputDirectoryResolution) {
    auto c = bundled_config("chua");
    ::unsetenv("BRC_OUTPUT_ROOT");
    EXPECT_EQ(resolve_output_dir(c, ""), "out/chua");
    c.output_dir = "runs/x";
    EXPECT_EQ(resolve_output_dir(c, ""), "runs/x");
    ::setenv("BRC_OUTPUT_ROOT", "/tmp/root", 1);
    EXPECT_EQ(resolve_output_dir(c, ""), "/tmp/root/chua");
    EXPECT_EQ(resolve_output_dir(c, "flag"), "flag");
    ::unsetenv("BRC_OUTPUT_ROOT");
}

TEST(Config, LoadMissingFile) { EXPECT_THROW(load_config("/nonexistent/cfg.json"), ConfigError); }
