#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kgtext/model.hpp"

namespace kgtext {

struct NonFiniteGradient : std::runtime_error {
  explicit NonFiniteGradient(const std::string& name)
      : std::runtime_error("non-finite gradient in " + name) {}
};

// Clip all gradients jointly to a global L2 norm. Returns the pre-clip norm.
template <class T>
double clip_global_norm(Seq2SeqModel<T>& model, double max_norm) {
  double sq = 0;
  for (const auto& p : model.params()) sq += static_cast<double>(p.grad.squaredNorm());
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    T s = static_cast<T>(max_norm / norm);
    for (auto& p : model.params()) p.grad *= s;
  }
  return norm;
}

template <class T>
class Adam {
public:
  using Mat = typename Seq2SeqModel<T>::Mat;

  explicit Adam(Seq2SeqModel<T>& model, double lr = 1e-4, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : model.params()) {
      m_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
    }
  }

  std::uint64_t step_count() const { return step_; }

  // One update from the accumulated gradients; grads are zeroed afterwards.
  // A non-finite gradient aborts the step with the model untouched.
  void step(Seq2SeqModel<T>& model) {
    for (const auto& p : model.params()) {
      if (!p.grad.allFinite()) throw NonFiniteGradient(p.name);
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    for (std::size_t k = 0; k < model.params().size(); ++k) {
      auto& p = model.params()[k];
      m_[k] = static_cast<T>(beta1_) * m_[k] + static_cast<T>(1 - beta1_) * p.grad;
      v_[k] = static_cast<T>(beta2_) * v_[k] +
              static_cast<T>(1 - beta2_) * p.grad.cwiseProduct(p.grad);
      Mat mhat = m_[k] / static_cast<T>(bc1);
      Mat vhat = v_[k] / static_cast<T>(bc2);
      Mat denom = vhat.cwiseSqrt() + Mat::Constant(vhat.rows(), vhat.cols(), static_cast<T>(eps_));
      p.value -= static_cast<T>(lr_) * mhat.cwiseQuotient(denom);
      p.grad.setZero();
    }
  }

private:
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t step_ = 0;
  std::vector<Mat> m_, v_;
};

}  // namespace kgtext
