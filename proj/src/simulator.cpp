#include "qnnflow/simulator.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <memory>
#include <span>

#include "qnnflow/errors.hpp"
#include "qnnflow/perfmodel.hpp"

namespace qnnflow {

int activation_bits(const ChannelActivation& act) {
  if (const auto* t = std::get_if<ThresholdSet>(&act)) {
    const std::size_t count = t->thresholds.size() + 1;
    int bits = 0;
    while ((std::size_t{1} << bits) < count) ++bits;
    if ((std::size_t{1} << bits) != count || bits < 1 || bits > 8) {
      throw ValidationError("threshold count " + std::to_string(t->thresholds.size()) +
                            " is not 2^b - 1 for b in 1..8");
    }
    return bits;
  }
  return std::get<AffineActivation>(act).out_bits;
}

std::int64_t apply_activation(const ChannelActivation& act, std::int64_t acc) {
  if (const auto* t = std::get_if<ThresholdSet>(&act)) return t->apply(acc);
  const auto& a = std::get<AffineActivation>(act);
  return quantize_activation(a.scale * static_cast<double>(acc) + a.bias, QuantSpec(a.out_bits),
                             a.mode);
}

namespace {

// Pixels and window groups are lane-major: element [lane * width + i].
using Item = std::vector<std::int64_t>;

class Queue {
 public:
  explicit Queue(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}
  bool full() const noexcept { return items_.size() >= capacity_; }
  bool empty() const noexcept { return items_.empty(); }
  void push(Item item) { items_.push_back(std::move(item)); }
  Item pop() {
    Item item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

 private:
  std::size_t capacity_;
  std::deque<Item> items_;
};

class Stage {
 public:
  virtual ~Stage() = default;
  virtual void step(std::uint64_t cycle) = 0;
};

class Source final : public Stage {
 public:
  Source(const QTensor& input, int m, Queue& out)
      : codes_(input.unpack()),
        n_(input.dims()[1]),
        c_(input.dims()[3]),
        m_(m),
        total_(static_cast<std::int64_t>(input.dims()[0] / static_cast<std::uint32_t>(m)) * n_ * n_),
        out_(out) {}

  void step(std::uint64_t) override {
    if (next_ >= total_ || out_.full()) return;
    const std::int64_t per_image = n_ * n_;
    const std::int64_t batch = next_ / per_image;
    const std::int64_t pos = next_ % per_image;
    Item px(static_cast<std::size_t>(m_ * c_));
    for (std::int64_t lane = 0; lane < m_; ++lane) {
      const std::int64_t image = batch * m_ + lane;
      const std::size_t base = static_cast<std::size_t>((image * per_image + pos) * c_);
      for (std::int64_t ch = 0; ch < c_; ++ch) px[lane * c_ + ch] = codes_[base + ch];
    }
    out_.push(std::move(px));
    ++next_;
  }

 private:
  std::vector<std::uint32_t> codes_;
  std::int64_t n_, c_, m_, total_;
  Queue& out_;
  std::int64_t next_ = 0;
};

// Line buffer of (ceil(K/S) + 1) stripes of S rows. Rows are released once
// the window cursor has moved past them; padding is synthesized, never stored.
class SlidingWindowUnit final : public Stage {
 public:
  SlidingWindowUnit(const LayerSpec& layer, int m, int simd, std::int64_t batches, Queue& in,
                    Queue& out, LayerCycleReport& report)
      : layer_(layer),
        m_(m),
        simd_(simd),
        n_out_(output_dim(layer).n_out),
        synapse_fold_(std::int64_t{layer.k} * layer.k * layer.c / simd),
        ring_rows_((std::int64_t{layer.k} + layer.s - 1) / layer.s * layer.s + layer.s),
        total_pixels_(batches * layer.n * layer.n),
        batches_(batches),
        in_(in),
        out_(out),
        report_(report) {}

  void step(std::uint64_t cycle) override {
    if (!finished_) emit(cycle);
    ingest();
    const auto resident = static_cast<std::uint64_t>(received_ - base_);
    report_.peak_swu_bits = std::max(report_.peak_swu_bits, resident * static_cast<std::uint64_t>(
                                                                           layer_.c * layer_.a_bits * m_));
  }

 private:
  std::int64_t first_live_row() const {
    return batch_ * layer_.n + std::max<std::int64_t>(0, oy_ * layer_.s - layer_.pad);
  }

  void emit(std::uint64_t cycle) {
    const std::int64_t offset = group_ * simd_;
    const std::int64_t tap = offset / layer_.c;
    const std::int64_t c0 = offset % layer_.c;
    const std::int64_t r = oy_ * layer_.s + tap / layer_.k - layer_.pad;
    const std::int64_t col = ox_ * layer_.s + tap % layer_.k - layer_.pad;
    const bool padding = r < 0 || r >= layer_.n || col < 0 || col >= layer_.n;
    const std::int64_t pixel = (batch_ * layer_.n + r) * layer_.n + col;

    if (!padding && pixel >= received_) {
      ++report_.swu.starved;
      return;
    }
    if (out_.full()) {
      ++report_.swu.blocked;
      return;
    }
    Item group(static_cast<std::size_t>(m_ * simd_), 0);
    if (!padding) {
      const Item& px = buffer_[static_cast<std::size_t>(pixel - base_)];
      for (std::int64_t lane = 0; lane < m_; ++lane) {
        for (std::int64_t i = 0; i < simd_; ++i) group[lane * simd_ + i] = px[lane * layer_.c + c0 + i];
      }
    }
    out_.push(std::move(group));
    ++report_.swu.busy;
    if (!report_.swu.first_output_cycle) report_.swu.first_output_cycle = cycle;
    advance();
  }

  void advance() {
    if (++group_ < synapse_fold_) return;
    group_ = 0;
    if (++ox_ < n_out_) return;
    ox_ = 0;
    if (++oy_ < n_out_) {
      release();
      return;
    }
    oy_ = 0;
    if (++batch_ == batches_) {
      finished_ = true;
      buffer_.clear();
      base_ = received_;
      return;
    }
    release();
  }

  void release() {
    const std::int64_t keep_from = first_live_row() * layer_.n;
    while (base_ < keep_from && !buffer_.empty()) {
      buffer_.pop_front();
      ++base_;
    }
  }

  void ingest() {
    if (received_ >= total_pixels_ || in_.empty()) return;
    const std::int64_t row = received_ / layer_.n;
    if (!finished_ && row >= first_live_row() + ring_rows_) return;
    buffer_.push_back(in_.pop());
    ++received_;
    // Rows skipped by a stride larger than the kernel are dropped on arrival.
    release();
  }

  LayerSpec layer_;
  std::int64_t m_, simd_, n_out_, synapse_fold_, ring_rows_, total_pixels_, batches_;
  Queue& in_;
  Queue& out_;
  LayerCycleReport& report_;

  std::deque<Item> buffer_;
  std::int64_t base_ = 0;  // global index of buffer_.front()
  std::int64_t received_ = 0;
  std::int64_t batch_ = 0, oy_ = 0, ox_ = 0, group_ = 0;
  bool finished_ = false;
};

// Multi-vector MVTU: each cycle applies one SIMD x PE weight block to all M
// lanes. The input vector is read from the stream during the first neuron
// fold and reused from the local buffer for the remaining folds.
class MatrixVectorUnit final : public Stage {
 public:
  MatrixVectorUnit(const LayerSpec& layer, int m, const LayerFolding& fold, std::int64_t batches,
                   const LayerParams& params, Queue& in, Queue& out, LayerCycleReport& report)
      : m_(m),
        pe_(fold.pe),
        simd_(fold.simd),
        c_out_(layer.c_out),
        row_len_(std::int64_t{layer.k} * layer.k * layer.c),
        synapse_fold_(row_len_ / fold.simd),
        neuron_fold_(layer.c_out / fold.pe),
        windows_total_(batches * output_dim(layer).n_out * output_dim(layer).n_out),
        enc_(layer.w_bits),
        activation_(params.activation),
        in_(in),
        out_(out),
        report_(report),
        window_(static_cast<std::size_t>(m_ * row_len_)),
        acc_(static_cast<std::size_t>(m_ * pe_), 0),
        out_pixel_(static_cast<std::size_t>(m_ * c_out_), 0) {
    // Reorder (c_out, c_in, k, k) weights into rows ordered (ky, kx, c_in),
    // the order in which the SWU streams a window.
    const auto codes = params.weights.unpack();
    weights_.resize(static_cast<std::size_t>(c_out_ * row_len_));
    for (std::int64_t co = 0; co < c_out_; ++co) {
      for (std::int64_t ci = 0; ci < layer.c; ++ci) {
        for (std::int64_t ky = 0; ky < layer.k; ++ky) {
          for (std::int64_t kx = 0; kx < layer.k; ++kx) {
            const std::int64_t src = ((co * layer.c + ci) * layer.k + ky) * layer.k + kx;
            const std::int64_t dst = co * row_len_ + (ky * layer.k + kx) * layer.c + ci;
            weights_[static_cast<std::size_t>(dst)] = codes[static_cast<std::size_t>(src)];
          }
        }
      }
    }
  }

  void step(std::uint64_t cycle) override {
    if (pending_) {
      if (out_.full()) {
        ++report_.mvtu.blocked;
        return;
      }
      publish(std::move(*pending_), cycle);
      pending_.reset();
    }
    if (windows_done_ == windows_total_) return;

    if (nf_ == 0) {
      if (in_.empty()) {
        ++report_.mvtu.starved;
        return;
      }
      const Item group = in_.pop();
      for (std::int64_t lane = 0; lane < m_; ++lane) {
        for (std::int64_t i = 0; i < simd_; ++i) {
          window_[static_cast<std::size_t>(lane * row_len_ + sf_ * simd_ + i)] =
              static_cast<std::uint32_t>(group[lane * simd_ + i]);
        }
      }
    }

    const std::span<const std::uint32_t> all_weights(weights_);
    const std::span<const std::uint32_t> all_inputs(window_);
    for (std::int64_t p = 0; p < pe_; ++p) {
      const std::int64_t co = nf_ * pe_ + p;
      const auto w = all_weights.subspan(static_cast<std::size_t>(co * row_len_ + sf_ * simd_),
                                         static_cast<std::size_t>(simd_));
      for (std::int64_t lane = 0; lane < m_; ++lane) {
        const auto a = all_inputs.subspan(static_cast<std::size_t>(lane * row_len_ + sf_ * simd_),
                                          static_cast<std::size_t>(simd_));
        acc_[static_cast<std::size_t>(lane * pe_ + p)] += mac_dot(a, w, enc_);
      }
    }
    ++report_.weight_block_fetches;
    report_.weight_row_fetches += static_cast<std::uint64_t>(pe_);
    ++report_.mvtu.busy;

    if (++sf_ < synapse_fold_) return;
    sf_ = 0;
    for (std::int64_t p = 0; p < pe_; ++p) {
      const std::int64_t co = nf_ * pe_ + p;
      for (std::int64_t lane = 0; lane < m_; ++lane) {
        auto& acc = acc_[static_cast<std::size_t>(lane * pe_ + p)];
        out_pixel_[static_cast<std::size_t>(lane * c_out_ + co)] =
            activation_.empty() ? acc : apply_activation(activation_[static_cast<std::size_t>(co)], acc);
        acc = 0;
      }
    }
    if (++nf_ < neuron_fold_) return;
    nf_ = 0;
    ++windows_done_;
    if (out_.full()) {
      pending_ = out_pixel_;
    } else {
      publish(out_pixel_, cycle);
    }
  }

 private:
  void publish(Item px, std::uint64_t cycle) {
    out_.push(std::move(px));
    if (!report_.mvtu.first_output_cycle) report_.mvtu.first_output_cycle = cycle;
  }

  std::int64_t m_, pe_, simd_, c_out_, row_len_, synapse_fold_, neuron_fold_, windows_total_;
  WeightEncoding enc_;
  const std::vector<ChannelActivation>& activation_;
  Queue& in_;
  Queue& out_;
  LayerCycleReport& report_;
  std::vector<std::uint32_t> weights_;
  std::vector<std::uint32_t> window_;
  std::vector<std::int64_t> acc_;
  Item out_pixel_;
  std::optional<Item> pending_;
  std::int64_t nf_ = 0, sf_ = 0, windows_done_ = 0;
};

// Max pooling over in-bounds pixels; consumes and computes in zero cycles.
class PoolUnit final : public Stage {
 public:
  PoolUnit(const LayerSpec& layer, int m, std::int64_t batches, Queue& in, Queue& out,
           LayerCycleReport& report)
      : layer_(layer),
        m_(m),
        n_out_(output_dim(layer).n_out),
        batches_(batches),
        in_(in),
        out_(out),
        report_(report) {}

  void step(std::uint64_t cycle) override {
    while (!in_.empty()) {
      buffer_.push_back(in_.pop());
      ++received_;
    }
    while (!finished_ && !out_.full()) {
      const std::int64_t n = layer_.n;
      const std::int64_t r0 = std::max<std::int64_t>(0, oy_ * layer_.s - layer_.pad);
      const std::int64_t r1 = std::min<std::int64_t>(n - 1, oy_ * layer_.s + layer_.k - 1 - layer_.pad);
      const std::int64_t c0 = std::max<std::int64_t>(0, ox_ * layer_.s - layer_.pad);
      const std::int64_t c1 = std::min<std::int64_t>(n - 1, ox_ * layer_.s + layer_.k - 1 - layer_.pad);
      if ((batch_ * n + r1) * n + c1 >= received_) break;

      const std::int64_t width = m_ * layer_.c;
      Item px(static_cast<std::size_t>(width), std::numeric_limits<std::int64_t>::min());
      for (std::int64_t r = r0; r <= r1; ++r) {
        for (std::int64_t col = c0; col <= c1; ++col) {
          const Item& in = buffer_[static_cast<std::size_t>((batch_ * n + r) * n + col - base_)];
          for (std::int64_t i = 0; i < width; ++i) px[i] = std::max(px[i], in[i]);
        }
      }
      out_.push(std::move(px));
      if (!report_.mvtu.first_output_cycle) report_.mvtu.first_output_cycle = cycle;
      advance();
    }
  }

 private:
  void advance() {
    if (++ox_ < n_out_) return;
    ox_ = 0;
    if (++oy_ == n_out_) {
      oy_ = 0;
      if (++batch_ == batches_) finished_ = true;
    }
    const std::int64_t keep_from =
        (batch_ * layer_.n + std::max<std::int64_t>(0, oy_ * layer_.s - layer_.pad)) * layer_.n;
    while (!buffer_.empty() && (finished_ || base_ < keep_from)) {
      buffer_.pop_front();
      ++base_;
    }
  }

  LayerSpec layer_;
  std::int64_t m_, n_out_, batches_;
  Queue& in_;
  Queue& out_;
  LayerCycleReport& report_;
  std::deque<Item> buffer_;
  std::int64_t base_ = 0, received_ = 0;
  std::int64_t batch_ = 0, oy_ = 0, ox_ = 0;
  bool finished_ = false;
};

class Sink {
 public:
  Sink(std::int64_t n_out, std::int64_t c_out, int m, std::int64_t batches, Queue& in)
      : n_out_(n_out), c_out_(c_out), m_(m), batches_(batches), in_(in),
        values_(static_cast<std::size_t>(batches * m * n_out * n_out * c_out)) {}

  void step(std::uint64_t cycle, CycleReport& report) {
    const std::int64_t per_batch = n_out_ * n_out_;
    while (!in_.empty()) {
      const Item px = in_.pop();
      if (count_ == 0) report.first_output_cycle = cycle;
      const std::int64_t batch = count_ / per_batch;
      const std::int64_t pos = count_ % per_batch;
      for (std::int64_t lane = 0; lane < m_; ++lane) {
        const std::int64_t image = batch * m_ + lane;
        for (std::int64_t ch = 0; ch < c_out_; ++ch) {
          values_[static_cast<std::size_t>((image * per_batch + pos) * c_out_ + ch)] = px[lane * c_out_ + ch];
        }
      }
      if (++count_ % per_batch == 0) report.batch_completion_cycles.push_back(cycle);
    }
  }

  bool done() const noexcept { return count_ == batches_ * n_out_ * n_out_; }
  const std::vector<std::int64_t>& values() const noexcept { return values_; }

 private:
  std::int64_t n_out_, c_out_, m_, batches_;
  Queue& in_;
  std::vector<std::int64_t> values_;
  std::int64_t count_ = 0;
};

void check_input(const QTensor& input, const NetworkTopology& topo, int m) {
  const auto& d = input.dims();
  const LayerSpec& first = topo.layers.front();
  if (d.size() != 4 || d[1] != static_cast<std::uint32_t>(first.n) ||
      d[2] != static_cast<std::uint32_t>(first.n) || d[3] != static_cast<std::uint32_t>(first.c)) {
    throw ValidationError("input tensor must have dims (images, " + std::to_string(first.n) + ", " +
                          std::to_string(first.n) + ", " + std::to_string(first.c) + ")");
  }
  if (input.encoding() != TensorEncoding::unsigned_level_code || input.bits() != first.a_bits) {
    throw ValidationError("input tensor must hold " + std::to_string(first.a_bits) +
                          "-bit unsigned level codes");
  }
  if (d[0] == 0 || d[0] % static_cast<std::uint32_t>(m) != 0) {
    throw ValidationError("image count " + std::to_string(d[0]) + " is not a positive multiple of m = " +
                          std::to_string(m));
  }
}

// Returns the output precision of each compute layer (0 = raw accumulators).
std::vector<int> check_params(const NetworkTopology& topo, const std::vector<LayerParams>& params) {
  const auto compute = compute_layer_indices(topo);
  if (params.size() != compute.size()) {
    throw ValidationError("expected parameters for " + std::to_string(compute.size()) +
                          " compute layers, got " + std::to_string(params.size()));
  }
  std::vector<int> out_bits;
  for (std::size_t i = 0; i < compute.size(); ++i) {
    const std::size_t li = compute[i];
    const LayerSpec& layer = topo.layers[li];
    const std::string where = "layer " + std::to_string(li) + ": ";
    const auto& w = params[i].weights;
    const std::vector<std::uint32_t> want = {static_cast<std::uint32_t>(layer.c_out),
                                             static_cast<std::uint32_t>(layer.c),
                                             static_cast<std::uint32_t>(layer.k),
                                             static_cast<std::uint32_t>(layer.k)};
    if (w.dims() != want) throw ValidationError(where + "weights must have dims (c_out, c_in, k, k)");
    const auto enc = layer.w_bits == 1 ? TensorEncoding::bipolar : TensorEncoding::twos_complement;
    if (w.encoding() != enc || w.bits() != layer.w_bits) {
      throw ValidationError(where + "weights must be " + std::string(to_string(enc)) + " with " +
                            std::to_string(layer.w_bits) + " bits");
    }
    const auto& act = params[i].activation;
    bool downstream_compute = false;
    for (std::size_t j = li + 1; j < topo.layers.size(); ++j) {
      downstream_compute = downstream_compute || topo.layers[j].has_weights();
    }
    if (act.empty()) {
      if (downstream_compute) throw ValidationError(where + "only the last compute layer may emit raw accumulators");
      if (accumulator_bits(std::int64_t{layer.k} * layer.k * layer.c, layer.a_bits,
                           WeightEncoding(layer.w_bits)) > 32) {
        throw ValidationError(where + "accumulator exceeds 32 bits");
      }
      out_bits.push_back(0);
      continue;
    }
    if (act.size() != static_cast<std::size_t>(layer.c_out)) {
      throw ValidationError(where + "expected " + std::to_string(layer.c_out) +
                            " activation channels, got " + std::to_string(act.size()));
    }
    const int bits = activation_bits(act.front());
    for (const auto& a : act) {
      if (activation_bits(a) != bits) throw ValidationError(where + "channels disagree on output precision");
      if (const auto* t = std::get_if<ThresholdSet>(&a)) validate_thresholds(*t, bits);
    }
    if (li + 1 < topo.layers.size() && bits != output_bits(topo, li)) {
      throw ValidationError(where + "activations produce " + std::to_string(bits) +
                            "-bit codes but the next layer reads " +
                            std::to_string(output_bits(topo, li)) + " bits");
    }
    out_bits.push_back(bits);
  }
  return out_bits;
}

QTensor make_output(const std::vector<std::int64_t>& values, std::vector<std::uint32_t> dims, int bits) {
  if (bits == 0) return QTensor::pack_signed(std::move(dims), 32, TensorEncoding::signed_accumulator, values);
  std::vector<std::uint32_t> codes(values.begin(), values.end());
  return QTensor::pack(std::move(dims), bits, TensorEncoding::unsigned_level_code, codes);
}

}  // namespace

SimResult simulate_network(const NetworkTopology& topo, const FoldingConfig& fold,
                           const std::vector<LayerParams>& params, const QTensor& input,
                           const SimOptions& options) {
  validate(topo);
  validate_folding(topo, fold);
  check_input(input, topo, fold.m);
  const std::vector<int> out_bits = check_params(topo, params);
  const std::int64_t batches = input.dims()[0] / static_cast<std::uint32_t>(fold.m);

  auto capacity = [&](std::size_t fallback, std::optional<std::size_t> layer) {
    if (layer && *layer < options.layer_queue_capacity.size() && options.layer_queue_capacity[*layer] > 0) {
      return options.layer_queue_capacity[*layer];
    }
    return options.queue_capacity > 0 ? options.queue_capacity : fallback;
  };

  SimResult result;
  CycleReport& report = result.report;
  report.m = fold.m;
  report.layers.resize(topo.layers.size());

  std::deque<Queue> queues;
  std::vector<std::unique_ptr<Stage>> stages;
  queues.emplace_back(capacity(static_cast<std::size_t>(topo.layers.front().n), std::nullopt));
  Source source(input, fold.m, queues.back());

  std::size_t compute_pos = 0;
  int bits = topo.layers.front().a_bits;
  for (std::size_t li = 0; li < topo.layers.size(); ++li) {
    const LayerSpec& layer = topo.layers[li];
    const auto n_out = static_cast<std::size_t>(output_dim(layer).n_out);
    LayerCycleReport& lr = report.layers[li];
    lr.layer_index = li;
    lr.kind = layer.kind;
    Queue& in = queues.back();
    if (layer.has_weights()) {
      const LayerFolding& f = fold.per_layer[compute_pos];
      const auto sf = static_cast<std::size_t>(std::int64_t{layer.k} * layer.k * layer.c / f.simd);
      lr.swu.name = "swu";
      lr.mvtu.name = "mvtu";
      lr.analytic_ii = layer_ii(layer, f);
      lr.swu_bits_bound = static_cast<std::uint64_t>(fold.m) *
                          static_cast<std::uint64_t>((layer.k + layer.s - 1) / layer.s + 1) *
                          static_cast<std::uint64_t>(layer.s) *
                          static_cast<std::uint64_t>(layer.padded_n()) *
                          static_cast<std::uint64_t>(layer.c) * static_cast<std::uint64_t>(layer.a_bits);
      queues.emplace_back(capacity(n_out * sf, std::nullopt));
      Queue& windows = queues.back();
      queues.emplace_back(capacity(n_out, li));
      Queue& out = queues.back();
      stages.push_back(std::make_unique<SlidingWindowUnit>(layer, fold.m, f.simd, batches, in, windows, lr));
      stages.push_back(std::make_unique<MatrixVectorUnit>(layer, fold.m, f, batches, params[compute_pos],
                                                          windows, out, lr));
      bits = out_bits[compute_pos];
      ++compute_pos;
    } else {
      lr.mvtu.name = "pool";
      queues.emplace_back(capacity(n_out, li));
      stages.push_back(std::make_unique<PoolUnit>(layer, fold.m, batches, in, queues.back(), lr));
    }
  }

  const LayerSpec& last = topo.layers.back();
  const auto last_dim = output_dim(last);
  Sink sink(last_dim.n_out, last_dim.c_out, fold.m, batches, queues.back());

  std::uint64_t cycle = 0;
  for (; !sink.done(); ++cycle) {
    if (cycle >= options.max_cycles) throw Error("simulation exceeded max_cycles (deadlock?)");
    sink.step(cycle, report);
    if (sink.done()) break;
    for (auto it = stages.rbegin(); it != stages.rend(); ++it) (*it)->step(cycle);
    source.step(cycle);
  }
  report.total_cycles = cycle + 1;
  const auto& done = report.batch_completion_cycles;
  report.cycles_per_batch = done.size() >= 2 ? done[done.size() - 1] - done[done.size() - 2]
                                             : report.total_cycles;
  for (auto& lr : report.layers) {
    lr.busy_per_batch = static_cast<double>(lr.mvtu.busy) / static_cast<double>(batches);
  }

  const std::vector<std::uint32_t> dims = {input.dims()[0], static_cast<std::uint32_t>(last_dim.n_out),
                                           static_cast<std::uint32_t>(last_dim.n_out),
                                           static_cast<std::uint32_t>(last_dim.c_out)};
  result.output = make_output(sink.values(), dims, bits);
  return result;
}

SimResult simulate_layer(const QTensor& input, const LayerSpec& layer, const LayerFolding& fold,
                         int m, const LayerParams& params, const SimOptions& options) {
  const NetworkTopology topo =
      chain_layers("layer", InputSpec{layer.n, layer.n, layer.c, layer.a_bits}, {layer});
  return simulate_network(topo, FoldingConfig{m, {fold}}, {params}, input, options);
}

}  // namespace qnnflow
