#include "mick/encoder.hpp"

#include <array>
#include <cmath>

#include "mick/error.hpp"

namespace mick {

namespace {

Tensor uniform(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace

EncoderParams EncoderParams::init(std::size_t vocab_size, const EncoderDims& dims, Rng& rng) {
  if (vocab_size < 2 || dims.max_length == 0 || dims.word_dim == 0 || dims.pos_dim == 0 ||
      dims.hidden_dim == 0 || dims.window == 0) {
    throw ValidationError("encoder dimensions must be positive");
  }
  EncoderParams p;
  p.window = dims.window;
  p.word_table = {"word_table", uniform({vocab_size, dims.word_dim}, 0.1, rng)};
  for (double& v : p.word_table.value.row(Vocab::kPad)) v = 0.0;
  p.pos_head_table = {"pos_head_table", uniform({dims.position_buckets(), dims.pos_dim}, 0.1, rng)};
  p.pos_tail_table = {"pos_tail_table", uniform({dims.position_buckets(), dims.pos_dim}, 0.1, rng)};
  const double fan_in = static_cast<double>(dims.window * dims.input_depth());
  p.conv_filters = {"conv_filters", uniform({dims.hidden_dim, dims.window * dims.input_depth()},
                                            1.0 / std::sqrt(fan_in), rng)};
  p.conv_bias = {"conv_bias", Tensor({dims.hidden_dim})};
  return p;
}

std::array<Parameter*, 5> EncoderParams::parameters() noexcept {
  return {&word_table, &pos_head_table, &pos_tail_table, &conv_filters, &conv_bias};
}

std::array<const Parameter*, 5> EncoderParams::parameters() const noexcept {
  return {&word_table, &pos_head_table, &pos_tail_table, &conv_filters, &conv_bias};
}

EncoderNodes EncoderNodes::bind(Graph& graph, const EncoderParams& params) {
  EncoderNodes n;
  n.word_table = graph.leaf(params.word_table.value);
  n.pos_head_table = graph.leaf(params.pos_head_table.value);
  n.pos_tail_table = graph.leaf(params.pos_tail_table.value);
  n.conv_filters = graph.leaf(params.conv_filters.value);
  n.conv_bias = graph.leaf(params.conv_bias.value);
  n.window = params.window;
  return n;
}

void EncoderNodes::collect(const Gradients& grads, GradientMap& out,
                           const EncoderParams& params) const {
  const std::array<std::pair<NodeId, const Parameter*>, 5> pairs{{
      {word_table, &params.word_table},
      {pos_head_table, &params.pos_head_table},
      {pos_tail_table, &params.pos_tail_table},
      {conv_filters, &params.conv_filters},
      {conv_bias, &params.conv_bias},
  }};
  for (const auto& [node, param] : pairs) {
    auto [it, fresh] = out.try_emplace(param->name, grads.get(node));
    if (!fresh) it->second.add_scaled(grads.get(node));
  }
}

NodeId embed_input(Graph& graph, const EncoderNodes& enc, const EncodedInstance& inst) {
  const std::size_t t = inst.max_length();
  if (t == 0 || inst.pos_head.size() != t || inst.pos_tail.size() != t) {
    throw ValidationError("corrupt encoded instance: sequence lengths disagree");
  }
  const std::array<NodeId, 3> parts{
      graph.lookup(enc.word_table, inst.token_ids),
      graph.lookup(enc.pos_head_table, inst.pos_head),
      graph.lookup(enc.pos_tail_table, inst.pos_tail),
  };
  return graph.concat_cols(parts);
}

NodeId encode_sentence(Graph& graph, const EncoderNodes& enc, NodeId embedded,
                       std::size_t true_length) {
  if (true_length == 0) throw ValidationError("encode_sentence: true length must be positive");
  const NodeId conv =
      graph.conv1d(embedded, enc.conv_filters, enc.conv_bias, true_length, enc.window);
  return graph.max_over_rows(graph.relu(conv));
}

NodeId encode(Graph& graph, const EncoderNodes& enc, const EncodedInstance& inst) {
  return encode_sentence(graph, enc, embed_input(graph, enc, inst), inst.true_length);
}

}  // namespace mick
