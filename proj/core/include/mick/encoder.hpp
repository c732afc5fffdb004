#pragma once

#include <array>
#include <cstddef>

#include "mick/episode.hpp"
#include "mick/graph.hpp"
#include "mick/optim.hpp"
#include "mick/tensor.hpp"

namespace mick {

struct EncoderDims {
  std::size_t max_length = 128;  // T
  std::size_t word_dim = 50;     // d_c
  std::size_t pos_dim = 5;       // d_p
  std::size_t hidden_dim = 230;  // d_h
  std::size_t window = 3;

  std::size_t input_depth() const noexcept { return word_dim + 2 * pos_dim; }
  std::size_t position_buckets() const noexcept { return 2 * max_length - 1; }
};

/// Embedding tables and convolution weights: the slow-learner parameters.
struct EncoderParams {
  Parameter word_table;      // |V| x d_c, PAD row zero at init
  Parameter pos_head_table;  // (2T-1) x d_p
  Parameter pos_tail_table;  // (2T-1) x d_p
  Parameter conv_filters;    // d_h x (window * (d_c + 2 d_p))
  Parameter conv_bias;       // d_h
  std::size_t window = 3;

  // Tables uniform in [-0.1, 0.1], filters uniform in +-1/sqrt(window * depth),
  // bias zero.
  static EncoderParams init(std::size_t vocab_size, const EncoderDims& dims, Rng& rng);

  std::size_t hidden_dim() const noexcept { return conv_bias.value.size(); }
  std::array<Parameter*, 5> parameters() noexcept;
  std::array<const Parameter*, 5> parameters() const noexcept;
};

/// Leaf nodes holding one graph's copy of the encoder parameters.
struct EncoderNodes {
  NodeId word_table;
  NodeId pos_head_table;
  NodeId pos_tail_table;
  NodeId conv_filters;
  NodeId conv_bias;
  std::size_t window = 3;

  static EncoderNodes bind(Graph& graph, const EncoderParams& params);
  void collect(const Gradients& grads, GradientMap& out, const EncoderParams& params) const;
};

/// X = [word | head position | tail position] per row, [T x (d_c + 2 d_p)].
NodeId embed_input(Graph& graph, const EncoderNodes& enc, const EncodedInstance& inst);

/// Convolution over the true sentence, relu, then max over window
/// positions. Rows at or beyond `true_length` are never read.
NodeId encode_sentence(Graph& graph, const EncoderNodes& enc, NodeId embedded,
                       std::size_t true_length);

// embed_input followed by encode_sentence.
NodeId encode(Graph& graph, const EncoderNodes& enc, const EncodedInstance& inst);

}  // namespace mick
