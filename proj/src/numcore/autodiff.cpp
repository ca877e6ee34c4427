#include "opirl/numcore/autodiff.hpp"

#include <cmath>

#include "opirl/numcore/errors.hpp"

namespace opirl::ad {

namespace {

Matrix broadcast_to(const Matrix& m, Index rows, Index cols) {
  if (m.rows() == rows && m.cols() == cols) return m;
  if (m.rows() == 1 && m.cols() == 1) return Matrix::Constant(rows, cols, m(0, 0));
  if (m.rows() == 1 && m.cols() == cols) return m.replicate(rows, 1);
  if (m.cols() == 1 && m.rows() == rows) return m.replicate(1, cols);
  throw DimensionError("cannot broadcast " + shape_string(m) + " to (" + std::to_string(rows) + "x" +
                       std::to_string(cols) + ")");
}

Matrix reduce_to(const Matrix& g, Index rows, Index cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  if (rows == 1 && cols == 1) return Matrix::Constant(1, 1, g.sum());
  if (rows == 1) return g.colwise().sum();
  return g.rowwise().sum();
}

std::pair<Index, Index> broadcast_shape(const Matrix& a, const Matrix& b, const char* what) {
  const Index rows = std::max(a.rows(), b.rows());
  const Index cols = std::max(a.cols(), b.cols());
  auto fits = [&](const Matrix& m) {
    return (m.rows() == rows || m.rows() == 1) && (m.cols() == cols || m.cols() == 1);
  };
  if (!fits(a) || !fits(b)) {
    throw DimensionError(std::string(what) + ": incompatible shapes " + shape_string(a) + " and " +
                         shape_string(b));
  }
  return {rows, cols};
}

double log_sigmoid_scalar(double x) { return std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x))); }

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double abs_pow_scalar(double x, double p) {
  if (x == 0.0) return 0.0;
  return std::exp(p * std::log(std::abs(x)));
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::Constant: return "constant";
    case Op::Leaf: return "parameter";
    case Op::MatMul: return "matmul";
    case Op::Transpose: return "transpose";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::AddScalar: return "add_scalar";
    case Op::Relu: return "relu";
    case Op::Tanh: return "tanh";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::AbsPow: return "abs_pow";
    case Op::Square: return "square";
    case Op::Sqrt: return "sqrt";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::RowSum: return "row_sum";
    case Op::LogSigmoid: return "log_sigmoid";
    case Op::ConcatCols: return "concat_cols";
    case Op::SliceCols: return "slice_cols";
    case Op::Clamp: return "clamp";
  }
  return "unknown";
}

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }

double Var::item() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw ContractError("item() on non-scalar node " + shape_string(v));
  return v(0, 0);
}

Var Tape::record(Op op, Matrix value, int a, int b, double k, Index i0, Index i1) {
  Node node;
  node.op = op;
  node.a = a;
  node.b = b;
  node.k = k;
  node.i0 = i0;
  node.i1 = i1;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Matrix value) { return record(Op::Constant, std::move(value)); }

Var Tape::parameter(Parameter& param) {
  Var v = record(Op::Leaf, param.value);
  nodes_.back().param = &param;
  return v;
}

std::vector<int> Tape::parents(Var v) const {
  const Node& n = nodes_[v.id()];
  std::vector<int> out;
  if (n.a >= 0) out.push_back(n.a);
  if (n.b >= 0) out.push_back(n.b);
  return out;
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var output) {
  if (output.tape_ != this) throw ContractError("backward: node belongs to a different tape");
  const Matrix& out = nodes_[output.id()].value;
  if (out.rows() != 1 || out.cols() != 1) {
    throw ContractError("backward requires a scalar (1x1) output, got " + shape_string(out));
  }
  for (Node& n : nodes_) n.grad.resize(0, 0);
  nodes_[output.id()].grad = Matrix::Ones(1, 1);

  for (int i = output.id(); i >= 0; --i) {
    // Parents always precede i, so accumulate() never writes to node i.
    if (nodes_[i].grad.size() == 0) continue;
    const Node& n = nodes_[i];
    const Matrix& g = n.grad;
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Leaf: {
        Parameter& p = *n.param;
        if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) p.zero_grad();
        p.grad += g;
        break;
      }
      case Op::MatMul: {
        const Matrix ga = g * nodes_[n.b].value.transpose();
        const Matrix gb = nodes_[n.a].value.transpose() * g;
        accumulate(n.a, ga);
        accumulate(n.b, gb);
        break;
      }
      case Op::Transpose:
        accumulate(n.a, g.transpose());
        break;
      case Op::Add:
      case Op::Sub: {
        const Matrix& av = nodes_[n.a].value;
        const Matrix& bv = nodes_[n.b].value;
        accumulate(n.a, reduce_to(g, av.rows(), av.cols()));
        Matrix gb = reduce_to(g, bv.rows(), bv.cols());
        if (n.op == Op::Sub) gb = -gb;
        accumulate(n.b, gb);
        break;
      }
      case Op::Mul: {
        const Matrix& av = nodes_[n.a].value;
        const Matrix& bv = nodes_[n.b].value;
        const Matrix ab = broadcast_to(av, g.rows(), g.cols());
        const Matrix bb = broadcast_to(bv, g.rows(), g.cols());
        const Matrix ga = reduce_to(g.cwiseProduct(bb), av.rows(), av.cols());
        const Matrix gb = reduce_to(g.cwiseProduct(ab), bv.rows(), bv.cols());
        accumulate(n.a, ga);
        accumulate(n.b, gb);
        break;
      }
      case Op::Scale:
        accumulate(n.a, n.k * g);
        break;
      case Op::AddScalar:
        accumulate(n.a, g);
        break;
      case Op::Relu: {
        const Matrix mask = (n.value.array() > 0.0).cast<double>();
        accumulate(n.a, g.cwiseProduct(mask));
        break;
      }
      case Op::Tanh: {
        const Matrix d = (1.0 - n.value.array().square()).matrix();
        accumulate(n.a, g.cwiseProduct(d));
        break;
      }
      case Op::Exp:
        accumulate(n.a, g.cwiseProduct(n.value));
        break;
      case Op::Log:
        accumulate(n.a, (g.array() / nodes_[n.a].value.array()).matrix());
        break;
      case Op::AbsPow: {
        const Matrix& x = nodes_[n.a].value;
        const double p = n.k;
        Matrix d = x.unaryExpr([p](double v) {
          if (v == 0.0) return 0.0;
          const double s = v > 0 ? 1.0 : -1.0;
          return s * p * abs_pow_scalar(v, p - 1.0);
        });
        accumulate(n.a, g.cwiseProduct(d));
        break;
      }
      case Op::Square:
        accumulate(n.a, 2.0 * g.cwiseProduct(nodes_[n.a].value));
        break;
      case Op::Sqrt:
        accumulate(n.a, (g.array() / (2.0 * n.value.array())).matrix());
        break;
      case Op::Sum: {
        const Matrix& av = nodes_[n.a].value;
        accumulate(n.a, Matrix::Constant(av.rows(), av.cols(), g(0, 0)));
        break;
      }
      case Op::Mean: {
        const Matrix& av = nodes_[n.a].value;
        accumulate(n.a, Matrix::Constant(av.rows(), av.cols(), g(0, 0) / static_cast<double>(av.size())));
        break;
      }
      case Op::RowSum: {
        const Matrix& av = nodes_[n.a].value;
        accumulate(n.a, g.replicate(1, av.cols()));
        break;
      }
      case Op::LogSigmoid: {
        const Matrix d = nodes_[n.a].value.unaryExpr([](double v) { return sigmoid_scalar(-v); });
        accumulate(n.a, g.cwiseProduct(d));
        break;
      }
      case Op::ConcatCols: {
        const Index ca = nodes_[n.a].value.cols();
        const Index cb = nodes_[n.b].value.cols();
        accumulate(n.a, g.leftCols(ca));
        accumulate(n.b, g.rightCols(cb));
        break;
      }
      case Op::SliceCols: {
        const Matrix& av = nodes_[n.a].value;
        Matrix ga = Matrix::Zero(av.rows(), av.cols());
        ga.middleCols(n.i0, n.i1) = g;
        accumulate(n.a, ga);
        break;
      }
      case Op::Clamp: {
        // Gradient passes only where the clamp was inactive.
        const Matrix mask = (nodes_[n.a].value.array() == n.value.array()).cast<double>();
        accumulate(n.a, g.cwiseProduct(mask));
        break;
      }
    }
  }
}

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_string(a.value()) + " x " + shape_string(b.value()));
  }
  return a.tape().record(Op::MatMul, a.value() * b.value(), a.id(), b.id());
}

Var transpose(Var a) { return a.tape().record(Op::Transpose, a.value().transpose(), a.id()); }

Var operator+(Var a, Var b) {
  auto [r, c] = broadcast_shape(a.value(), b.value(), "add");
  Matrix v = broadcast_to(a.value(), r, c) + broadcast_to(b.value(), r, c);
  return a.tape().record(Op::Add, std::move(v), a.id(), b.id());
}

Var operator-(Var a, Var b) {
  auto [r, c] = broadcast_shape(a.value(), b.value(), "sub");
  Matrix v = broadcast_to(a.value(), r, c) - broadcast_to(b.value(), r, c);
  return a.tape().record(Op::Sub, std::move(v), a.id(), b.id());
}

Var operator*(Var a, Var b) {
  auto [r, c] = broadcast_shape(a.value(), b.value(), "mul");
  Matrix v = broadcast_to(a.value(), r, c).cwiseProduct(broadcast_to(b.value(), r, c));
  return a.tape().record(Op::Mul, std::move(v), a.id(), b.id());
}

Var operator*(double k, Var a) { return a.tape().record(Op::Scale, k * a.value(), a.id(), -1, k); }
Var operator*(Var a, double k) { return k * a; }

Var operator+(Var a, double k) {
  return a.tape().record(Op::AddScalar, (a.value().array() + k).matrix(), a.id(), -1, k);
}
Var operator+(double k, Var a) { return a + k; }
Var operator-(Var a, double k) { return a + (-k); }
Var operator-(double k, Var a) { return (-1.0 * a) + k; }
Var operator-(Var a) { return -1.0 * a; }

Var relu(Var a) { return a.tape().record(Op::Relu, a.value().cwiseMax(0.0), a.id()); }

Var tanh(Var a) { return a.tape().record(Op::Tanh, a.value().array().tanh().matrix(), a.id()); }

Var exp(Var a) { return a.tape().record(Op::Exp, a.value().array().exp().matrix(), a.id()); }

Var log(Var a) { return a.tape().record(Op::Log, a.value().array().log().matrix(), a.id()); }

Var abs_pow(Var a, double p) {
  Matrix v = a.value().unaryExpr([p](double x) { return abs_pow_scalar(x, p); });
  return a.tape().record(Op::AbsPow, std::move(v), a.id(), -1, p);
}

Var square(Var a) { return a.tape().record(Op::Square, a.value().array().square().matrix(), a.id()); }

Var sqrt(Var a) { return a.tape().record(Op::Sqrt, a.value().array().sqrt().matrix(), a.id()); }

Var sum(Var a) { return a.tape().record(Op::Sum, Matrix::Constant(1, 1, a.value().sum()), a.id()); }

Var mean(Var a) {
  if (a.value().size() == 0) throw ContractError("mean of an empty node");
  return a.tape().record(Op::Mean, Matrix::Constant(1, 1, a.value().mean()), a.id());
}

Var row_sum(Var a) { return a.tape().record(Op::RowSum, a.value().rowwise().sum(), a.id()); }

Var log_sigmoid(Var a) {
  return a.tape().record(Op::LogSigmoid, a.value().unaryExpr(&log_sigmoid_scalar), a.id());
}

Var concat_cols(Var a, Var b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: " + shape_string(a.value()) + " and " + shape_string(b.value()));
  }
  Matrix v(a.rows(), a.cols() + b.cols());
  v << a.value(), b.value();
  return a.tape().record(Op::ConcatCols, std::move(v), a.id(), b.id());
}

Var slice_cols(Var a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw DimensionError("slice_cols: columns [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") of " + shape_string(a.value()));
  }
  return a.tape().record(Op::SliceCols, a.value().middleCols(start, count), a.id(), -1, 0.0, start,
                         count);
}

Var clamp(Var a, double lo, double hi) {
  if (lo > hi) throw ContractError("clamp: lo > hi");
  return a.tape().record(Op::Clamp, a.value().cwiseMax(lo).cwiseMin(hi), a.id());
}

Var detach(Var a) { return a.tape().constant(a.value()); }

}  // namespace opirl::ad
