#include "isk/seekrl/losses.hpp"

#include "isk/num/error.hpp"

namespace isk::seekrl {

namespace {

int batch_of(Tape& t, const std::vector<Var>& steps, const char* what) {
  ISK_CHECK(!steps.empty(), what << ": no per-step terms");
  const Tensor& v0 = t.val(steps[0]);
  ISK_CHECK(v0.rank() == 1, what << ": per-step terms must be [B], got "
                                 << v0.shape_str());
  return v0.size();
}

Tensor weighted(const Tensor& a, const Tensor& b, real scale) {
  Tensor out = a;
  for (int i = 0; i < out.size(); ++i) out[i] *= b[i] * scale;
  return out;
}

}  // namespace

Var policy_loss(Tape& t, const std::vector<Var>& logp,
                const std::vector<Tensor>& adv, const std::vector<Tensor>& active,
                real entropy_coef, const std::vector<Var>& entropy) {
  const int B = batch_of(t, logp, "policy_loss");
  ISK_CHECK(adv.size() == logp.size() && active.size() == logp.size(),
            "policy_loss: " << logp.size() << " steps vs " << adv.size()
                            << " advantages / " << active.size() << " masks");
  const real inv_b = real(1) / static_cast<real>(B);
  Var loss = t.constant(Tensor::scalar(0));
  for (size_t s = 0; s < logp.size(); ++s) {
    // Advantages enter as fixed dot weights, so they never carry gradient.
    loss = num::add(t, loss,
                    num::dot_const(t, logp[s], weighted(adv[s], active[s], -inv_b)));
    if (entropy_coef != 0) {
      ISK_CHECK(entropy.size() == logp.size(),
                "policy_loss: entropy terms missing for nonzero coefficient");
      Tensor w = active[s];
      for (int i = 0; i < w.size(); ++i) w[i] *= -entropy_coef * inv_b;
      loss = num::add(t, loss, num::dot_const(t, entropy[s], w));
    }
  }
  return loss;
}

Var td_lambda_loss(Tape& t, const std::vector<Var>& values,
                   const std::vector<Tensor>& targets,
                   const std::vector<Tensor>& active) {
  const int B = batch_of(t, values, "td_lambda_loss");
  ISK_CHECK(targets.size() == values.size() && active.size() == values.size(),
            "td_lambda_loss: " << values.size() << " steps vs " << targets.size()
                               << " targets / " << active.size() << " masks");
  const real inv_b = real(1) / static_cast<real>(B);
  Var loss = t.constant(Tensor::scalar(0));
  for (size_t s = 0; s < values.size(); ++s) {
    Var err = num::square(t, num::sub_const(t, values[s], targets[s]));
    Tensor w = active[s];
    for (int i = 0; i < w.size(); ++i) w[i] *= inv_b;
    loss = num::add(t, loss, num::dot_const(t, err, w));
  }
  return loss;
}

Var prediction_loss(Tape& t, const std::vector<Var>& label_ll,
                    const std::vector<Var>& recon_ll, real w_intrinsic,
                    const std::vector<Tensor>& active) {
  ISK_CHECK(!label_ll.empty() || !recon_ll.empty(),
            "prediction_loss: nothing to train on");
  const int B = label_ll.empty() ? batch_of(t, recon_ll, "prediction_loss")
                                 : batch_of(t, label_ll, "prediction_loss");
  const real inv_b = real(1) / static_cast<real>(B);
  Var loss = t.constant(Tensor::scalar(0));
  for (size_t s = 0; s < label_ll.size(); ++s) {
    ISK_CHECK(s < active.size(), "prediction_loss: missing activity mask");
    Tensor w = active[s];
    for (int i = 0; i < w.size(); ++i) w[i] *= -inv_b;
    loss = num::add(t, loss, num::dot_const(t, label_ll[s], w));
  }
  for (size_t s = 0; s < recon_ll.size(); ++s) {
    ISK_CHECK(s < active.size(), "prediction_loss: missing activity mask");
    Tensor w = active[s];
    for (int i = 0; i < w.size(); ++i) w[i] *= -inv_b * w_intrinsic;
    loss = num::add(t, loss, num::dot_const(t, recon_ll[s], w));
  }
  return loss;
}

Var total_loss(Tape& t, Var policy, Var value, Var prediction, real c_v, real c_f) {
  return num::add(t, policy,
                  num::add(t, num::scale(t, value, c_v), num::scale(t, prediction, c_f)));
}

}  // namespace isk::seekrl
