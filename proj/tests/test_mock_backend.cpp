// Copyright 2026 The zs-apa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <array>

#include "test_support.hpp"
#include "zsapa/error.hpp"
#include "zsapa/mock_backend.hpp"

namespace zsapa {
namespace {

using testing::ClipFromWindowMeans;
using testing::ConstantClip;

TEST(MockBackend, OneSecondGivesFiftyFrames) {
  MockBackend backend;
  AudioClip clip;
  clip.samples.assign(16000, 0.1f);
  EXPECT_EQ(backend.EncodeFrames(clip).T(), 50u);
  clip.samples.resize(16319);
  EXPECT_EQ(backend.EncodeFrames(clip).T(), 50u);
}

TEST(MockBackend, ShortOrMisratedClipsAreRejected) {
  MockBackend backend;
  AudioClip clip;
  clip.samples.assign(319, 0.1f);
  try {
    backend.EncodeFrames(clip);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAudioTooShort);
  }
  clip.samples.assign(640, 0.1f);
  clip.sample_rate = 8000;
  EXPECT_THROW(backend.EncodeFrames(clip), Error);
}

TEST(MockBackend, ConstantSignalFrames) {
  MockBackend backend;
  const FrameSequence seq = backend.EncodeFrames(ConstantClip(0.5f, 2));
  ASSERT_EQ(seq.T(), 2u);
  const std::vector<float> expected{0.5f, 0.5f, 0.5f, 0.5f, 0.5f, 0.5f, 0.0f, 0.0f};
  for (std::size_t t = 0; t < 2; ++t) {
    EXPECT_EQ(std::vector<float>(seq.frames.row(t).begin(), seq.frames.row(t).end()), expected);
  }
}

TEST(MockBackend, SilenceGivesZeroFrames) {
  MockBackend backend;
  const FrameSequence seq = backend.EncodeFrames(ConstantClip(0.0f, 3));
  for (float v : seq.frames.data()) EXPECT_EQ(v, 0.0f);
}

TEST(MockBackend, AlternatingSignalCrossesEverySample) {
  std::vector<float> w(320);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = i % 2 == 0 ? 1.0f : -1.0f;
  // Closed form: 319 sign changes over 319 neighbour pairs.
  std::size_t changes = 0;
  for (std::size_t i = 1; i < w.size(); ++i) changes += (w[i] > 0) != (w[i - 1] > 0);
  const double expected_zcr = static_cast<double>(changes) / 319.0;
  const auto f = MockWindowFeatures(w);
  EXPECT_NEAR(f[7], expected_zcr, 1e-6);
  EXPECT_NEAR(f[7], 1.0, 1e-6);
  EXPECT_EQ(f[0], 0.0f);
  EXPECT_EQ(f[1], 1.0f);
  EXPECT_EQ(f[2], -1.0f);
  EXPECT_EQ(f[3], 1.0f);
  EXPECT_EQ(f[6], -2.0f);
}

Matrix Rows(std::initializer_list<std::array<float, 2>> rows) {
  Matrix m(rows.size(), 2);
  std::size_t r = 0;
  for (const auto& row : rows) {
    m(r, 0) = row[0];
    m(r, 1) = row[1];
    ++r;
  }
  return m;
}

TEST(MockInterpolate, ClosedForms) {
  const Matrix abc = Rows({{1, 10}, {7, 7}, {3, 30}});
  const Matrix mid = MockInterpolate(abc, IndexSet{1});
  EXPECT_EQ(mid(1, 0), 2.0f);
  EXPECT_EQ(mid(1, 1), 20.0f);
  EXPECT_EQ(mid(0, 0), 1.0f);

  EXPECT_EQ(MockInterpolate(abc, IndexSet{}), abc);

  const Matrix abcd = Rows({{1, 1}, {2, 4}, {3, 9}, {4, 16}});
  const Matrix head = MockInterpolate(abcd, IndexSet{0});
  EXPECT_EQ(head(0, 0), 2.0f);
  EXPECT_EQ(head(0, 1), 4.0f);
  const Matrix tail = MockInterpolate(abcd, IndexSet{2, 3});
  EXPECT_EQ(tail(3, 1), 4.0f);

  // Two masked rows between 0 and 30: one and two thirds of the way.
  const Matrix gap = MockInterpolate(Rows({{0, 0}, {5, 5}, {5, 5}, {30, 3}}), IndexSet{1, 2});
  EXPECT_EQ(gap(1, 0), 10.0f);
  EXPECT_EQ(gap(2, 0), 20.0f);
  EXPECT_EQ(gap(1, 1), 1.0f);

  const Matrix all = MockInterpolate(abc, IndexSet{0, 1, 2});
  for (float v : all.data()) EXPECT_EQ(v, 0.0f);
}

TEST(MockBackend, ContextualizeFullMaskKeepsShape) {
  MockBackend backend;
  const FrameSequence seq = backend.EncodeFrames(ClipFromWindowMeans({0.1f, 0.2f, 0.3f, 0.4f}));
  const IndexSet everything{0, 1, 2, 3};
  const LayerFeatures out = backend.Contextualize(seq, everything, 7);
  EXPECT_EQ(out.T(), 4u);
  EXPECT_EQ(out.layer, 7);
  EXPECT_EQ(backend.Contextualize(seq, IndexSet{}, 7).features, seq.frames);
}

TEST(MockBackend, ContextualizeIsDeterministicAndBatchConsistent) {
  MockBackend backend;
  const FrameSequence seq = backend.EncodeFrames(ClipFromWindowMeans(testing::RoughMeans(60, 1.0, 5)));
  const std::vector<IndexSet> masks{{0, 1}, {10, 11, 12}, {59}, {}};
  const auto batch = backend.ContextualizeBatch(seq, masks, 3);
  ASSERT_EQ(batch.size(), masks.size());
  for (std::size_t j = 0; j < masks.size(); ++j) {
    EXPECT_EQ(batch[j].features, backend.Contextualize(seq, masks[j], 3).features);
  }
}

TEST(MockBackend, LayerAndIndexChecks) {
  MockBackend backend;
  const FrameSequence seq = backend.EncodeFrames(ConstantClip(0.2f, 3));
  for (int bad : {0, 13, -1}) {
    try {
      backend.Contextualize(seq, IndexSet{}, bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kLayerOutOfRange);
    }
    EXPECT_THROW(backend.CodebookFor(bad), Error);
  }
  EXPECT_THROW(backend.Contextualize(seq, IndexSet{3}, 7), Error);
}

TEST(MockBackend, CodebookBinsTileTheMeanAxis) {
  MockBackend backend;
  EXPECT_EQ(backend.metadata().num_layers, 12);
  EXPECT_EQ(backend.mask_vector().size(), 8u);
  for (int layer = 1; layer <= 12; ++layer) {
    const Codebook& cb = backend.CodebookFor(layer);
    ASSERT_EQ(cb.size(), 16u);
    ASSERT_EQ(cb.layer, layer);
    for (std::size_t i = 0; i < 16; ++i) {
      EXPECT_FLOAT_EQ(cb.centroids(i, 0), -1.0f + (2.0f * static_cast<float>(i) + 1.0f) / 16.0f);
      for (std::size_t d = 1; d < 8; ++d) EXPECT_EQ(cb.centroids(i, d), 0.0f);
    }
  }
  EXPECT_NO_THROW(ValidateCodebook(backend.CodebookFor(7)));
}

}  // namespace
}  // namespace zsapa
