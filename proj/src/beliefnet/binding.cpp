#include "isk/beliefnet/net.hpp"

#include "isk/num/error.hpp"

namespace isk::beliefnet {

Binding::Binding(Tape& t, const ParamStore& store) : store_(&store) {
  vars_.reserve(store.entries().size());
  for (const auto& e : store.entries()) {
    index_.emplace(e.name, static_cast<int>(vars_.size()));
    vars_.push_back(t.param(e.value.get()));
  }
}

Binding::Binding(const ParamStore& store, std::vector<Var> vars) : store_(&store) {
  ISK_CHECK(static_cast<int>(vars.size()) == store.count(),
            "binding: got " << vars.size() << " vars for " << store.count()
                            << " parameters");
  vars_ = std::move(vars);
  for (int i = 0; i < store.count(); ++i)
    index_.emplace(store.entries()[static_cast<size_t>(i)].name, i);
}

Var Binding::of(const std::string& name) const {
  auto it = index_.find(name);
  ISK_CHECK(it != index_.end(), "binding: unknown parameter '" << name << "'");
  return vars_[static_cast<size_t>(it->second)];
}

std::vector<Tensor> Binding::grads(const Tape& t) const {
  std::vector<Tensor> out;
  out.reserve(vars_.size());
  for (Var v : vars_) out.push_back(t.grad(v));
  return out;
}

}  // namespace isk::beliefnet
