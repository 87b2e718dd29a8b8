#pragma once

#include <map>
#include <string>
#include <vector>

#include "fairway/ad/graph.hpp"

namespace fairway {

/// Ordered collection of named parameter leaves. Insertion order is the
/// canonical order for checkpoints and optimizer state, so runs are
/// reproducible byte for byte.
class ParamStore {
public:
    ad::Var create(const std::string& name, Tensor init);
    ad::Var get(const std::string& name) const;
    bool has(const std::string& name) const;

    std::size_t size() const { return entries_.size(); }
    std::size_t scalar_count() const;
    void zero_grads();

    struct Entry {
        std::string name;
        ad::Var var;
    };
    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<Entry>& entries() { return entries_; }

private:
    std::vector<Entry> entries_;
    std::map<std::string, std::size_t> index_;
};

} // namespace fairway
