#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace kgtext {

// Minimal tape-based reverse-mode engine. Values are dense matrices; column
// vectors are n x 1. A Tape is built per training instance and discarded.
template <class T>
class Tape {
public:
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Ref = int;

  struct Node {
    Mat val;
    Mat grad;
    std::function<void(Tape&)> back;
  };

  const Mat& val(Ref r) const { return nodes_[r].val; }
  const Mat& grad(Ref r) const { return nodes_[r].grad; }
  std::size_t size() const { return nodes_.size(); }

  Ref leaf(Mat v) { return push(std::move(v), nullptr); }

  // Leaf bound to an external parameter; backward accumulates into grad_accum.
  Ref param(const Mat& value, Mat* grad_accum) {
    Ref r = push(value, nullptr);
    nodes_[r].back = [r, grad_accum](Tape& t) { *grad_accum += t.nodes_[r].grad; };
    return r;
  }

  // Single column of an external parameter (embedding lookup).
  Ref param_col(const Mat& value, Mat* grad_accum, int j) {
    Ref r = push(value.col(j), nullptr);
    nodes_[r].back = [r, grad_accum, j](Tape& t) { grad_accum->col(j) += t.nodes_[r].grad; };
    return r;
  }

  Ref matmul(Ref a, Ref b) {
    Ref r = push(nodes_[a].val * nodes_[b].val, nullptr);
    nodes_[r].back = [r, a, b](Tape& t) {
      t.nodes_[a].grad.noalias() += t.nodes_[r].grad * t.nodes_[b].val.transpose();
      t.nodes_[b].grad.noalias() += t.nodes_[a].val.transpose() * t.nodes_[r].grad;
    };
    return r;
  }

  Ref add(Ref a, Ref b) {
    Ref r = push(nodes_[a].val + nodes_[b].val, nullptr);
    nodes_[r].back = [r, a, b](Tape& t) {
      t.nodes_[a].grad += t.nodes_[r].grad;
      t.nodes_[b].grad += t.nodes_[r].grad;
    };
    return r;
  }

  // matrix + column vector broadcast over columns
  Ref bcast_add(Ref m, Ref v) {
    Mat out = nodes_[m].val;
    out.colwise() += nodes_[v].val.col(0);
    Ref r = push(std::move(out), nullptr);
    nodes_[r].back = [r, m, v](Tape& t) {
      t.nodes_[m].grad += t.nodes_[r].grad;
      t.nodes_[v].grad += t.nodes_[r].grad.rowwise().sum();
    };
    return r;
  }

  Ref hadamard(Ref a, Ref b) {
    Ref r = push(nodes_[a].val.cwiseProduct(nodes_[b].val), nullptr);
    nodes_[r].back = [r, a, b](Tape& t) {
      t.nodes_[a].grad += t.nodes_[r].grad.cwiseProduct(t.nodes_[b].val);
      t.nodes_[b].grad += t.nodes_[r].grad.cwiseProduct(t.nodes_[a].val);
    };
    return r;
  }

  Ref sigmoid(Ref a) {
    Mat y = nodes_[a].val.unaryExpr([](T x) { return T(1) / (T(1) + std::exp(-x)); });
    Ref r = push(std::move(y), nullptr);
    nodes_[r].back = [r, a](Tape& t) {
      const Mat& y = t.nodes_[r].val;
      t.nodes_[a].grad += t.nodes_[r].grad.cwiseProduct(
          y.cwiseProduct((Mat::Ones(y.rows(), y.cols()) - y)));
    };
    return r;
  }

  Ref tanh_(Ref a) {
    Mat y = nodes_[a].val.unaryExpr([](T x) { return std::tanh(x); });
    Ref r = push(std::move(y), nullptr);
    nodes_[r].back = [r, a](Tape& t) {
      const Mat& y = t.nodes_[r].val;
      t.nodes_[a].grad += t.nodes_[r].grad.cwiseProduct(
          Mat::Ones(y.rows(), y.cols()) - y.cwiseProduct(y));
    };
    return r;
  }

  Ref transpose(Ref a) {
    Ref r = push(nodes_[a].val.transpose(), nullptr);
    nodes_[r].back = [r, a](Tape& t) { t.nodes_[a].grad += t.nodes_[r].grad.transpose(); };
    return r;
  }

  Ref slice_rows(Ref a, int start, int len) {
    Ref r = push(nodes_[a].val.middleRows(start, len), nullptr);
    nodes_[r].back = [r, a, start, len](Tape& t) {
      t.nodes_[a].grad.middleRows(start, len) += t.nodes_[r].grad;
    };
    return r;
  }

  Ref concat_rows(const std::vector<Ref>& parts) {
    int rows = 0;
    const int cols = static_cast<int>(nodes_[parts[0]].val.cols());
    for (Ref p : parts) rows += static_cast<int>(nodes_[p].val.rows());
    Mat out(rows, cols);
    int at = 0;
    for (Ref p : parts) {
      int r = static_cast<int>(nodes_[p].val.rows());
      out.middleRows(at, r) = nodes_[p].val;
      at += r;
    }
    Ref r = push(std::move(out), nullptr);
    nodes_[r].back = [r, parts](Tape& t) {
      int at = 0;
      for (Ref p : parts) {
        int n = static_cast<int>(t.nodes_[p].val.rows());
        t.nodes_[p].grad += t.nodes_[r].grad.middleRows(at, n);
        at += n;
      }
    };
    return r;
  }

  Ref concat_cols(const std::vector<Ref>& parts) {
    int cols = 0;
    const int rows = static_cast<int>(nodes_[parts[0]].val.rows());
    for (Ref p : parts) cols += static_cast<int>(nodes_[p].val.cols());
    Mat out(rows, cols);
    int at = 0;
    for (Ref p : parts) {
      int c = static_cast<int>(nodes_[p].val.cols());
      out.middleCols(at, c) = nodes_[p].val;
      at += c;
    }
    Ref r = push(std::move(out), nullptr);
    nodes_[r].back = [r, parts](Tape& t) {
      int at = 0;
      for (Ref p : parts) {
        int n = static_cast<int>(t.nodes_[p].val.cols());
        t.nodes_[p].grad += t.nodes_[r].grad.middleCols(at, n);
        at += n;
      }
    };
    return r;
  }

  // softmax over a column vector
  Ref softmax(Ref a) {
    const Mat& x = nodes_[a].val;
    T mx = x.maxCoeff();
    Mat y = (x.array() - mx).exp().matrix();
    y /= y.sum();
    Ref r = push(std::move(y), nullptr);
    nodes_[r].back = [r, a](Tape& t) {
      const Mat& y = t.nodes_[r].val;
      const Mat& g = t.nodes_[r].grad;
      T dot = (g.array() * y.array()).sum();
      t.nodes_[a].grad.array() += y.array() * (g.array() - dot);
    };
    return r;
  }

  Ref scale(Ref a, T c) {
    Ref r = push(nodes_[a].val * c, nullptr);
    nodes_[r].back = [r, a, c](Tape& t) { t.nodes_[a].grad += t.nodes_[r].grad * c; };
    return r;
  }

  // Copy-augmented NLL for one step. p = [gen] (1-g) * pgen[target_id]
  //                                  + g * sum_{i in copy_pos} pcopy[i]
  // target_id < 0 disables the generation path (OOV target present in source).
  Ref mixture_nll(Ref pgen, Ref pcopy, Ref gate, int target_id,
                  const std::vector<int>& copy_pos) {
    T g = nodes_[gate].val(0, 0);
    T p = 0;
    if (target_id >= 0) p += (T(1) - g) * nodes_[pgen].val(target_id, 0);
    T copy_sum = 0;
    for (int i : copy_pos) copy_sum += nodes_[pcopy].val(i, 0);
    p += g * copy_sum;
    const T tiny = std::numeric_limits<T>::min();
    if (p < tiny) p = tiny;
    Mat out(1, 1);
    out(0, 0) = -std::log(p);
    Ref r = push(std::move(out), nullptr);
    nodes_[r].back = [r, pgen, pcopy, gate, target_id, copy_pos, p, g, copy_sum](Tape& t) {
      T dldp = -t.nodes_[r].grad(0, 0) / p;
      if (target_id >= 0) {
        t.nodes_[pgen].grad(target_id, 0) += dldp * (T(1) - g);
        t.nodes_[gate].grad(0, 0) += dldp * (copy_sum - t.nodes_[pgen].val(target_id, 0));
      } else {
        t.nodes_[gate].grad(0, 0) += dldp * copy_sum;
      }
      for (int i : copy_pos) t.nodes_[pcopy].grad(i, 0) += dldp * g;
    };
    return r;
  }

  Ref sum(const std::vector<Ref>& terms) {
    Ref acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
    return acc;
  }

  void backward(Ref loss) {
    nodes_[loss].grad.setOnes();
    for (int i = loss; i >= 0; --i) {
      if (nodes_[i].back) nodes_[i].back(*this);
    }
  }

private:
  Ref push(Mat v, std::function<void(Tape&)> back) {
    Node n;
    n.grad = Mat::Zero(v.rows(), v.cols());
    n.val = std::move(v);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<Ref>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
};

}  // namespace kgtext
