#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <unordered_set>
#include <vector>

#include "grucnn/common.hpp"

namespace grucnn {

namespace detail {

struct TensorImpl;

// One recorded operation. Sequence numbers grow with creation, so sorting by
// them yields a valid topological order of any graph reachable from a loss.
struct Node {
  std::uint64_t seq = 0;
  const char* kind = "";
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  // Reads the gradient of the produced tensor and accumulates into inputs.
  std::function<void(const TensorImpl& out)> backward;
  bool consumed = false;
};

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient flows in
  bool requires_grad = false;
  std::shared_ptr<Node> node;  // null for leaves and untracked results

  std::vector<double>& ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    return grad;
  }
};

inline std::uint64_t next_node_seq() {
  static std::atomic<std::uint64_t> counter{0};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

inline bool& grad_mode_flag() {
  thread_local bool enabled = true;
  return enabled;
}

inline bool& finite_check_flag() {
#ifdef NDEBUG
  static bool enabled = false;
#else
  static bool enabled = true;
#endif
  return enabled;
}

inline void check_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw ContractError(str_cat(what, ": non-finite value ", values[i], " at flat index ", i));
  }
}

}  // namespace detail

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode_flag()) { detail::grad_mode_flag() = false; }
  ~NoGradGuard() { detail::grad_mode_flag() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

inline bool grad_enabled() { return detail::grad_mode_flag(); }

/// Turns the per-op non-finite check on or off (on by default in debug builds).
inline void set_finite_checks(bool enabled) { detail::finite_check_flag() = enabled; }

/// Dense row-major array of doubles with optional gradient tracking.
///
/// A Tensor is a shared handle: copies alias the same storage. Values are not
/// modified after creation except through `mutable_data()` on leaves, which is
/// reserved for optimizers and initializers.
class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false) {
    validate_shape(shape);
    if (shape_numel(shape) != data.size())
      throw ContractError(str_cat("Tensor: shape ", shape_str(shape), " needs ", shape_numel(shape),
                                  " values, got ", data.size()));
    detail::check_finite(data, "Tensor");
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
  }

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return full(std::move(shape), 0.0, requires_grad);
  }

  static Tensor full(Shape shape, double value, bool requires_grad = false) {
    validate_shape(shape);
    std::vector<double> data(shape_numel(shape), value);
    return from(std::move(shape), std::move(data), requires_grad);
  }

  static Tensor scalar(double value, bool requires_grad = false) {
    return from({1}, {value}, requires_grad);
  }

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl().shape; }
  std::size_t rank() const { return impl().shape.size(); }
  std::size_t dim(std::size_t axis) const {
    if (axis >= rank())
      throw ContractError(str_cat("Tensor::dim: axis ", axis, " out of range for ", shape_str(shape())));
    return impl().shape[axis];
  }
  std::size_t numel() const { return impl().data.size(); }

  std::span<const double> data() const { return impl().data; }
  double at(std::size_t flat) const { return impl().data.at(flat); }
  double item() const {
    if (numel() != 1) throw ContractError(str_cat("Tensor::item on shape ", shape_str(shape())));
    return impl().data[0];
  }

  /// Writable view of a leaf's values. Tensors produced by recorded ops are
  /// refused, since their values feed saved backward state.
  std::span<double> mutable_data() {
    if (impl().node) throw ContractError("Tensor::mutable_data: tensor is an op result, not a leaf");
    return impl().data;
  }

  bool requires_grad() const { return impl().requires_grad; }
  bool has_grad() const { return !impl().grad.empty(); }
  std::span<const double> grad() const { return impl().grad; }
  void zero_grad() { impl().grad.clear(); }

  /// Same values, no graph history, no gradient tracking.
  Tensor detach() const { return from(shape(), impl().data, false); }

  /// Reverse-mode sweep from this scalar. Leaves that require gradients
  /// receive accumulated d(this)/d(leaf). A graph can be swept once.
  void backward() const;

  const std::shared_ptr<detail::TensorImpl>& impl_ptr() const { return impl_; }
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  static void validate_shape(const Shape& shape) {
    if (shape.empty()) throw ContractError("Tensor: shape must have at least one extent");
    for (auto d : shape)
      if (d == 0) throw ContractError(str_cat("Tensor: zero extent in shape ", shape_str(shape)));
  }

  detail::TensorImpl& impl() const {
    if (!impl_) throw ContractError("Tensor: use of an undefined tensor");
    return *impl_;
  }

  std::shared_ptr<detail::TensorImpl> impl_;
};

namespace detail {

using BackwardFn = std::function<void(const TensorImpl& out)>;

/// Wraps a freshly computed result. A node is recorded only when gradient
/// mode is on and at least one input needs a gradient.
inline Tensor make_result(const char* kind, Shape shape, std::vector<double> data,
                          std::initializer_list<const Tensor*> inputs, BackwardFn backward) {
  if (finite_check_flag()) check_finite(data, kind);
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  bool track = false;
  if (grad_enabled()) {
    for (const Tensor* t : inputs)
      if (t->defined() && t->requires_grad()) track = true;
  }
  if (track) {
    auto node = std::make_shared<Node>();
    node->seq = next_node_seq();
    node->kind = kind;
    for (const Tensor* t : inputs)
      if (t->defined()) node->inputs.push_back(t->impl_ptr());
    node->backward = std::move(backward);
    impl->requires_grad = true;
    impl->node = std::move(node);
  }
  return Tensor(std::move(impl));
}

inline Tensor make_result(const char* kind, Shape shape, std::vector<double> data,
                          std::span<const Tensor> inputs, BackwardFn backward) {
  if (finite_check_flag()) check_finite(data, kind);
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  bool track = false;
  if (grad_enabled()) {
    for (const Tensor& t : inputs)
      if (t.requires_grad()) track = true;
  }
  if (track) {
    auto node = std::make_shared<Node>();
    node->seq = next_node_seq();
    node->kind = kind;
    for (const Tensor& t : inputs) node->inputs.push_back(t.impl_ptr());
    node->backward = std::move(backward);
    impl->requires_grad = true;
    impl->node = std::move(node);
  }
  return Tensor(std::move(impl));
}

}  // namespace detail

inline void Tensor::backward() const {
  using detail::TensorImpl;
  const auto& root = impl_;
  if (!root) throw ContractError("backward: undefined tensor");
  if (root->data.size() != 1)
    throw ContractError(str_cat("backward: loss must be a scalar, got shape ", shape_str(root->shape)));
  if (!root->requires_grad) throw ContractError("backward: loss is detached from any recorded graph");
  if (!root->node) {
    root->ensure_grad()[0] += 1.0;
    return;
  }

  // Collect every recorded producer reachable from the root.
  std::vector<TensorImpl*> order;
  std::unordered_set<const TensorImpl*> seen;
  std::vector<TensorImpl*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    TensorImpl* cur = stack.back();
    stack.pop_back();
    if (cur->node->consumed)
      throw ContractError("backward: graph was already swept; rebuild the forward pass first");
    order.push_back(cur);
    for (const auto& in : cur->node->inputs) {
      if (in->node && seen.insert(in.get()).second) stack.push_back(in.get());
    }
  }
  std::sort(order.begin(), order.end(),
            [](const TensorImpl* a, const TensorImpl* b) { return a->node->seq > b->node->seq; });

  root->grad.assign(1, 1.0);
  for (TensorImpl* t : order) {
    if (!t->grad.empty()) t->node->backward(*t);
  }
  for (TensorImpl* t : order) {
    t->node->consumed = true;
    t->node->backward = nullptr;
    std::vector<double>().swap(t->grad);
  }
}

}  // namespace grucnn
