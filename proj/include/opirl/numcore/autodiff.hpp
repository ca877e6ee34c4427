#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opirl/numcore/matrix.hpp"

namespace opirl::ad {

/// A trainable matrix together with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

enum class Op : std::uint8_t {
  Constant,
  Leaf,
  MatMul,
  Transpose,
  Add,
  Sub,
  Mul,
  Scale,
  AddScalar,
  Relu,
  Tanh,
  Exp,
  Log,
  AbsPow,
  Square,
  Sqrt,
  Sum,
  Mean,
  RowSum,
  LogSigmoid,
  ConcatCols,
  SliceCols,
  Clamp,
};

const char* op_name(Op op);

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  double item() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Records a computation as it is evaluated and replays it backwards.
///
/// Nodes are appended in evaluation order, so the node list is already a
/// topological order of the graph. A tape is single-threaded; parameters it
/// references must outlive it.
class Tape {
 public:
  Var constant(Matrix value);
  Var parameter(Parameter& param);

  /// Reverse pass from a 1x1 output. Node gradients are recomputed from scratch
  /// on every call; parameter gradients are accumulated into Parameter::grad.
  void backward(Var output);

  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

  Op op(Var v) const { return nodes_[v.id()].op; }
  std::vector<int> parents(Var v) const;
  const Matrix& value(int id) const { return nodes_[id].value; }
  const Matrix& grad(int id) const { return nodes_[id].grad; }

  Var record(Op op, Matrix value, int a = -1, int b = -1, double k = 0.0, Index i0 = 0,
             Index i1 = 0);

 private:
  struct Node {
    Op op = Op::Constant;
    int a = -1;
    int b = -1;
    double k = 0.0;
    Index i0 = 0;
    Index i1 = 0;
    Parameter* param = nullptr;
    Matrix value;
    Matrix grad;
  };

  void accumulate(int id, const Matrix& g);

  std::vector<Node> nodes_;
};

// Graph-building free functions. Binary elementwise operations broadcast a
// 1x1, 1xN or Mx1 operand against an MxN one.

Var matmul(Var a, Var b);
Var transpose(Var a);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator*(double k, Var a);
Var operator*(Var a, double k);
Var operator+(Var a, double k);
Var operator+(double k, Var a);
Var operator-(Var a, double k);
Var operator-(double k, Var a);
Var operator-(Var a);

Var relu(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
/// |x|^p evaluated as exp(p ln|x|); zero input maps to zero value and zero gradient.
Var abs_pow(Var a, double p);
Var square(Var a);
Var sqrt(Var a);
Var sum(Var a);
Var mean(Var a);
Var row_sum(Var a);
/// Numerically stable log(sigmoid(x)).
Var log_sigmoid(Var a);
Var concat_cols(Var a, Var b);
Var slice_cols(Var a, Index start, Index count);
Var clamp(Var a, double lo, double hi);

/// Same value as `a`, recorded as a constant so no gradient flows through it.
Var detach(Var a);

}  // namespace opirl::ad
