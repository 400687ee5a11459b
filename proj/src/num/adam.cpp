#include "isk/num/adam.hpp"

#include <cmath>

#include "isk/num/error.hpp"

namespace isk::num {

Tensor* ParamStore::create(const std::string& name, Tensor init) {
  ISK_CHECK(!name.empty(), "parameter name must not be empty");
  ISK_CHECK(find(name) == nullptr, "duplicate parameter name '" << name << "'");
  entries_.push_back({name, std::make_unique<Tensor>(std::move(init))});
  return entries_.back().value.get();
}

Tensor* ParamStore::find(const std::string& name) {
  for (auto& e : entries_)
    if (e.name == name) return e.value.get();
  return nullptr;
}

long long ParamStore::total_size() const {
  long long n = 0;
  for (const auto& e : entries_) n += e.value->size();
  return n;
}

Adam::Adam(ParamStore& params, AdamConfig cfg) : params_(params), cfg_(cfg) {
  for (const auto& e : params_.entries()) {
    m_.emplace_back(e.value->shape());
    v_.emplace_back(e.value->shape());
  }
}

void Adam::step(const std::vector<Tensor>& grads) {
  ISK_CHECK(static_cast<int>(grads.size()) == params_.count(),
            "adam: got " << grads.size() << " gradients for " << params_.count()
                         << " parameters");
  for (int i = 0; i < params_.count(); ++i) {
    const auto& e = params_.entries()[static_cast<size_t>(i)];
    ISK_CHECK(grads[static_cast<size_t>(i)].same_shape(*e.value),
              "adam: gradient shape " << grads[static_cast<size_t>(i)].shape_str()
                                      << " does not match parameter '" << e.name
                                      << "' " << e.value->shape_str());
    ISK_CHECK(grads[static_cast<size_t>(i)].all_finite(),
              "adam: non-finite gradient for parameter '" << e.name << "'");
  }
  ++step_;
  const real c1 = real(1) - std::pow(cfg_.beta1, static_cast<real>(step_));
  const real c2 = real(1) - std::pow(cfg_.beta2, static_cast<real>(step_));
  for (int i = 0; i < params_.count(); ++i) {
    Tensor& th = *params_.entries()[static_cast<size_t>(i)].value;
    const Tensor& g = grads[static_cast<size_t>(i)];
    Tensor& m = m_[static_cast<size_t>(i)];
    Tensor& v = v_[static_cast<size_t>(i)];
    for (int j = 0; j < th.size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (real(1) - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (real(1) - cfg_.beta2) * g[j] * g[j];
      th[j] -= cfg_.alpha * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.eps);
    }
  }
}

}  // namespace isk::num
