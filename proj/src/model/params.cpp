#include "fairway/model/params.hpp"

#include "fairway/core/error.hpp"

namespace fairway {

ad::Var ParamStore::create(const std::string& name, Tensor init) {
    if (index_.count(name)) throw ValidationError("duplicate parameter: " + name);
    ad::Var v = ad::Var::leaf(std::move(init));
    index_[name] = entries_.size();
    entries_.push_back({name, v});
    return v;
}

ad::Var ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown parameter: " + name);
    return entries_[it->second].var;
}

bool ParamStore::has(const std::string& name) const { return index_.count(name) != 0; }

std::size_t ParamStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.var.value().numel();
    return n;
}

void ParamStore::zero_grads() {
    for (auto& e : entries_) {
        e.var.grad().fill(0.0);
    }
}

} // namespace fairway
