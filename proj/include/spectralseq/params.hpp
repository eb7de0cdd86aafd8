#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "spectralseq/tensor.hpp"

namespace spectralseq {

/// Named trainable tensors with paired gradient buffers.
/// Registration order is fixed and drives both seeded initialization and
/// optimizer iteration, so it is part of the determinism contract.
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor value;
        Tensor grad;
    };

    int add(const std::string& name, Tensor init) {
        if (index_.count(name)) throw ConfigError("duplicate parameter: " + name);
        Tensor g(init.dims(), 0.0);
        entries_.push_back(Entry{name, std::move(init), std::move(g)});
        int id = int(entries_.size()) - 1;
        index_[name] = id;
        return id;
    }

    int find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : it->second;
    }

    int require(const std::string& name) const {
        int id = find(name);
        if (id < 0) throw ConfigError("unknown parameter: " + name);
        return id;
    }

    std::size_t size() const { return entries_.size(); }
    Entry& entry(std::size_t i) { return entries_.at(i); }
    const Entry& entry(std::size_t i) const { return entries_.at(i); }

    Tensor& value(const std::string& name) { return entries_[require(name)].value; }
    const Tensor& value(const std::string& name) const { return entries_[require(name)].value; }
    Tensor& grad(const std::string& name) { return entries_[require(name)].grad; }

    void zero_grad() {
        for (auto& e : entries_) e.grad.fill(0.0);
    }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& e : entries_) n += e.value.size();
        return n;
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, int> index_;
};

} // namespace spectralseq
