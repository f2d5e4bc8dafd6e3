#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "pmvb/common.hpp"
#include "pmvb/errors.hpp"

namespace pmvb {

/// Matrix-free linear map. Implementations must satisfy the adjoint identity
/// <Op x, y> == <x, Op^T y> and be safe to share across threads: apply() and
/// apply_adjoint() may not mutate shared state.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  Index in_dim() const { return in_dim_; }
  Index out_dim() const { return out_dim_; }

  void apply(ConstVecRef x, VecRef y) const {
    check(x.size() == in_dim_ && y.size() == out_dim_, "apply");
    do_apply(x, y);
  }
  void apply_adjoint(ConstVecRef y, VecRef x) const {
    check(y.size() == out_dim_ && x.size() == in_dim_, "apply_adjoint");
    do_apply_adjoint(y, x);
  }

  Vec apply(ConstVecRef x) const {
    Vec y(out_dim_);
    apply(x, y);
    return y;
  }
  Vec apply_adjoint(ConstVecRef y) const {
    Vec x(in_dim_);
    apply_adjoint(y, x);
    return x;
  }

 protected:
  LinearOperator(Index in_dim, Index out_dim) : in_dim_(in_dim), out_dim_(out_dim) {
    if (in_dim <= 0 || out_dim <= 0)
      throw DimensionError("LinearOperator: non-positive dimension");
  }

  virtual void do_apply(ConstVecRef x, VecRef y) const = 0;
  virtual void do_apply_adjoint(ConstVecRef y, VecRef x) const = 0;

 private:
  void check(bool ok, const char* where) const {
    if (!ok) throw DimensionError(std::string("LinearOperator::") + where +
                                  ": vector length mismatch");
  }

  Index in_dim_;
  Index out_dim_;
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(Index n) : LinearOperator(n, n) {}

 private:
  void do_apply(ConstVecRef x, VecRef y) const override { y = x; }
  void do_apply_adjoint(ConstVecRef y, VecRef x) const override { x = y; }
};

class DiagonalOperator final : public LinearOperator {
 public:
  explicit DiagonalOperator(Vec d) : LinearOperator(d.size(), d.size()), d_(std::move(d)) {}

 private:
  void do_apply(ConstVecRef x, VecRef y) const override { y = d_.cwiseProduct(x); }
  void do_apply_adjoint(ConstVecRef y, VecRef x) const override { x = d_.cwiseProduct(y); }
  Vec d_;
};

/// alpha * Op. Holds a reference to the wrapped part; immutable once built.
class ScaledOperator final : public LinearOperator {
 public:
  ScaledOperator(double alpha, OperatorPtr op)
      : LinearOperator(op->in_dim(), op->out_dim()), alpha_(alpha), op_(std::move(op)) {}

 private:
  void do_apply(ConstVecRef x, VecRef y) const override {
    op_->apply(x, y);
    y *= alpha_;
  }
  void do_apply_adjoint(ConstVecRef y, VecRef x) const override {
    op_->apply_adjoint(y, x);
    x *= alpha_;
  }
  double alpha_;
  OperatorPtr op_;
};

/// Vertical stack [A; B; ...]: all parts share in_dim, outputs concatenate.
class StackedOperator final : public LinearOperator {
 public:
  explicit StackedOperator(std::vector<OperatorPtr> parts)
      : LinearOperator(check_parts(parts), total_out(parts)), parts_(std::move(parts)) {}

 private:
  static Index check_parts(const std::vector<OperatorPtr>& parts) {
    if (parts.empty()) throw DimensionError("StackedOperator: no parts");
    Index n = parts.front()->in_dim();
    for (const auto& p : parts)
      if (p->in_dim() != n) throw DimensionError("StackedOperator: in_dim mismatch");
    return n;
  }
  static Index total_out(const std::vector<OperatorPtr>& parts) {
    Index m = 0;
    for (const auto& p : parts) m += p->out_dim();
    return m;
  }

  void do_apply(ConstVecRef x, VecRef y) const override {
    Index off = 0;
    for (const auto& p : parts_) {
      p->apply(x, y.segment(off, p->out_dim()));
      off += p->out_dim();
    }
  }
  void do_apply_adjoint(ConstVecRef y, VecRef x) const override {
    x.setZero();
    Vec part(in_dim());
    Index off = 0;
    for (const auto& p : parts_) {
      p->apply_adjoint(y.segment(off, p->out_dim()), part);
      x += part;
      off += p->out_dim();
    }
  }

  std::vector<OperatorPtr> parts_;
};

/// Composition A(B(x)).
class ComposedOperator final : public LinearOperator {
 public:
  ComposedOperator(OperatorPtr outer, OperatorPtr inner)
      : LinearOperator(inner->in_dim(), outer->out_dim()),
        outer_(std::move(outer)),
        inner_(std::move(inner)) {
    if (inner_->out_dim() != outer_->in_dim())
      throw DimensionError("ComposedOperator: inner out_dim != outer in_dim");
  }

 private:
  void do_apply(ConstVecRef x, VecRef y) const override {
    Vec mid(inner_->out_dim());
    inner_->apply(x, mid);
    outer_->apply(mid, y);
  }
  void do_apply_adjoint(ConstVecRef y, VecRef x) const override {
    Vec mid(outer_->in_dim());
    outer_->apply_adjoint(y, mid);
    inner_->apply_adjoint(mid, x);
  }

  OperatorPtr outer_;
  OperatorPtr inner_;
};

/// Extracts a rectangular window from a row-major grid; the adjoint embeds
/// the window back with zeros elsewhere.
class CropOperator final : public LinearOperator {
 public:
  CropOperator(GridDims full, int row0, int col0, GridDims window)
      : LinearOperator(full.size(), window.size()),
        full_(full), row0_(row0), col0_(col0), window_(window) {
    if (row0 < 0 || col0 < 0 || row0 + window.height > full.height ||
        col0 + window.width > full.width)
      throw DimensionError("CropOperator: window outside grid");
  }

  GridDims window() const { return window_; }
  GridDims full() const { return full_; }
  int row0() const { return row0_; }
  int col0() const { return col0_; }

 private:
  void do_apply(ConstVecRef x, VecRef y) const override {
    for (int i = 0; i < window_.height; ++i)
      y.segment(Index(i) * window_.width, window_.width) =
          x.segment(Index(i + row0_) * full_.width + col0_, window_.width);
  }
  void do_apply_adjoint(ConstVecRef y, VecRef x) const override {
    x.setZero();
    for (int i = 0; i < window_.height; ++i)
      x.segment(Index(i + row0_) * full_.width + col0_, window_.width) =
          y.segment(Index(i) * window_.width, window_.width);
  }

  GridDims full_;
  int row0_, col0_;
  GridDims window_;
};

/// Dense matrix wrapped as an operator; desk-scale tests and oracles only.
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Mat m) : LinearOperator(m.cols(), m.rows()), m_(std::move(m)) {}

  const Mat& matrix() const { return m_; }

 private:
  void do_apply(ConstVecRef x, VecRef y) const override { y.noalias() = m_ * x; }
  void do_apply_adjoint(ConstVecRef y, VecRef x) const override {
    x.noalias() = m_.transpose() * y;
  }
  Mat m_;
};

}  // namespace pmvb
