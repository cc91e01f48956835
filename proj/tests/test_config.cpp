// SPDX-License-Identifier: Apache-2.0
//
// beamopt: multi-user MISO downlink beamforming toolkit
// Copyright (C) 2026 The beamopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "test_util.hpp"

#include <filesystem>

using namespace beamopt;

namespace
{

const std::string kMinimal = "schema = 1\n[experiment]\nid = tiny\nm_tx = 2\nn_ue = 2\n";

std::string field_of(const std::string &text)
{
    try
    {
        parse_config(text);
    }
    catch (const ConfigError &e)
    {
        return e.field();
    }
    return "<accepted>";
}

} // namespace

TEST(Config, MinimalFileUsesDefaults)
{
    const ExperimentConfig c = parse_config(kMinimal);
    EXPECT_EQ(c.id, "tiny");
    EXPECT_EQ(c.channel.m_tx, 2u);
    EXPECT_EQ(c.p_max(), 2.0);
    EXPECT_TRUE(c.wants("NNBF-P"));
    EXPECT_FALSE(c.wants("WMMSE"));
    const ModelConfig m = c.model_config(false);
    EXPECT_EQ(m.k_sc, c.channel.k_sc());
    EXPECT_FALSE(m.joint_power);
    EXPECT_EQ(m.p_max, 2.0);
}

TEST(Config, SerializeRoundTrip)
{
    ExperimentConfig c = parse_config(kMinimal + "snr_grid_db = -3.3, 0.1, 17\nmethods = ZF, NNBF\n"
                                                 "[train]\nlr = 0.000123456789\nsnr_policy = fixed\nsnr_db = 2.5\n"
                                                 "[model]\nfc_hidden_bf = 64, 32\nwideband = true\n"
                                                 "[desk]\ntrain.epochs = 3\n");
    const ExperimentConfig back = parse_config(serialize_config(c));
    EXPECT_TRUE(back == c);
    EXPECT_EQ(serialize_config(back), serialize_config(c));
    EXPECT_EQ(back.train.lr, 0.000123456789);
    EXPECT_EQ(back.snr_grid_db, (std::vector<double>{-3.3, 0.1, 17}));
}

TEST(Config, ValidationNamesTheField)
{
    EXPECT_EQ(field_of("[experiment]\nid = x\n"), "schema");
    EXPECT_EQ(field_of("schema = 2\n"), "schema");
    EXPECT_EQ(field_of(kMinimal + "n_ue = 3\n"), "experiment.m_tx");
    EXPECT_EQ(field_of(kMinimal + "snr_grid_db = 0, 60\n"), "experiment.snr_grid_db");
    EXPECT_EQ(field_of(kMinimal + "snr_grid_db = 0, 60\nsnr_range_override = true\n"), "<accepted>");
    EXPECT_EQ(field_of(kMinimal + "methods = ZF, WMMSE\n"), "experiment.methods");
    EXPECT_EQ(field_of(kMinimal + "modulation = 64QAM\n"), "experiment.modulation");
    EXPECT_EQ(field_of(kMinimal + "bogus = 1\n"), "experiment.bogus");
    EXPECT_EQ(field_of(kMinimal + "[train]\nepochs = zero\n"), "train.epochs");
    EXPECT_EQ(field_of(kMinimal + "[train]\nepochs = 0\n"), "train.epochs");
    EXPECT_EQ(field_of(kMinimal + "[weird]\n"), "weird");
    EXPECT_EQ(field_of(kMinimal + "[desk]\nepochs = 3\n"), "desk.epochs");
    EXPECT_EQ(field_of(kMinimal + "[desk]\ntrain.epochz = 3\n"), "train.epochz");
}

TEST(Config, DeskOverridesApplyOnlyWhenRequested)
{
    const ExperimentConfig c = parse_config(kMinimal + "[dataset]\ntrain_samples = 100\n"
                                                       "[desk]\ndataset.train_samples = 10\nexperiment.subcarriers = 8\n");
    EXPECT_EQ(c.train_samples, 100u);
    const ExperimentConfig d = desk_scaled(c);
    EXPECT_EQ(d.train_samples, 10u);
    EXPECT_EQ(d.channel.k_sc(), 8u);
    EXPECT_EQ(d.id, c.id);
}

TEST(Config, BundledConfigsLoad)
{
    std::size_t count = 0;
    for (const auto &entry : std::filesystem::directory_iterator(BEAMOPT_CONFIG_DIR))
    {
        if (entry.path().extension() != ".cfg")
            continue;
        ++count;
        const ExperimentConfig full = load_config(entry.path());
        const ExperimentConfig desk = load_config(entry.path(), true);
        EXPECT_EQ(full.channel.k_sc(), 48u) << entry.path();
        EXPECT_EQ(desk.channel.k_sc(), 8u) << entry.path();
        EXPECT_LT(desk.train_samples, full.train_samples);
        EXPECT_NO_THROW(full.model_config(true).validate());
        EXPECT_NO_THROW(desk.model_config(true).validate());
        EXPECT_TRUE(parse_config(serialize_config(full)) == full);
    }
    EXPECT_EQ(count, 12u);
    EXPECT_THROW(load_config(std::filesystem::path(BEAMOPT_CONFIG_DIR) / "missing.cfg"), ConfigError);
}
