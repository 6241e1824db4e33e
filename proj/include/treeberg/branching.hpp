#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace treeberg {

/// Branching function q̃: level -> number of children. Every value must be >= 2.
class BranchingSpec {
public:
    enum class Kind { Constant, Table, Affine };

    static BranchingSpec constant(int q);
    // Per-level table; levels past the end repeat the last entry.
    static BranchingSpec table(std::vector<int> values);
    // q(level) = a + b*level, optionally capped (cap <= 0 means uncapped).
    static BranchingSpec affine(int a, int b, int cap = 0);

    static BranchingSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    // q̃(level); throws if the resulting value is < 2.
    int operator()(int level) const;

    Kind kind() const { return kind_; }
    std::string label() const;

private:
    BranchingSpec() = default;

    Kind kind_ = Kind::Constant;
    int q_ = 2;
    std::vector<int> values_;
    int a_ = 2, b_ = 0, cap_ = 0;
};

inline BranchingSpec BranchingSpec::constant(int q) {
    if (q < 2) throw std::invalid_argument("branching violation: q must be >= 2");
    BranchingSpec s;
    s.kind_ = Kind::Constant;
    s.q_ = q;
    return s;
}

inline BranchingSpec BranchingSpec::table(std::vector<int> values) {
    if (values.empty()) throw std::invalid_argument("branching table must be nonempty");
    for (int v : values)
        if (v < 2) throw std::invalid_argument("branching violation: table entry < 2");
    BranchingSpec s;
    s.kind_ = Kind::Table;
    s.values_ = std::move(values);
    return s;
}

inline BranchingSpec BranchingSpec::affine(int a, int b, int cap) {
    if (a < 2) throw std::invalid_argument("branching violation: affine offset a must be >= 2");
    if (b < 0) throw std::invalid_argument("affine slope must be >= 0");
    if (cap > 0 && cap < 2) throw std::invalid_argument("branching violation: cap < 2");
    BranchingSpec s;
    s.kind_ = Kind::Affine;
    s.a_ = a;
    s.b_ = b;
    s.cap_ = cap;
    return s;
}

inline int BranchingSpec::operator()(int level) const {
    if (level < 0) throw std::out_of_range("negative level");
    int q = 2;
    switch (kind_) {
        case Kind::Constant: q = q_; break;
        case Kind::Table:
            q = level < static_cast<int>(values_.size()) ? values_[level] : values_.back();
            break;
        case Kind::Affine: {
            long long v = static_cast<long long>(a_) + static_cast<long long>(b_) * level;
            if (cap_ > 0 && v > cap_) v = cap_;
            if (v > 1'000'000) throw std::invalid_argument("branching value overflow");
            q = static_cast<int>(v);
            break;
        }
    }
    if (q < 2) throw std::invalid_argument("branching violation: q̃(level) < 2");
    return q;
}

inline BranchingSpec BranchingSpec::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return constant(j.at("q").get<int>());
    if (kind == "table") {
        auto vals = j.at("values").get<std::vector<int>>();
        if (j.contains("tail") && j.at("tail").get<std::string>() != "repeat_last")
            throw std::invalid_argument("unsupported table tail rule");
        return table(std::move(vals));
    }
    if (kind == "affine")
        return affine(j.at("a").get<int>(), j.at("b").get<int>(),
                      j.value("cap", 0));
    throw std::invalid_argument("unknown branching kind: " + kind);
}

inline nlohmann::json BranchingSpec::to_json() const {
    nlohmann::json j;
    switch (kind_) {
        case Kind::Constant:
            j = {{"kind", "constant"}, {"q", q_}};
            break;
        case Kind::Table:
            j = {{"kind", "table"}, {"values", values_}, {"tail", "repeat_last"}};
            break;
        case Kind::Affine:
            j = {{"kind", "affine"}, {"a", a_}, {"b", b_}};
            if (cap_ > 0) j["cap"] = cap_;
            break;
    }
    return j;
}

inline std::string BranchingSpec::label() const {
    switch (kind_) {
        case Kind::Constant: return "const" + std::to_string(q_);
        case Kind::Table: {
            std::string s = "table";
            for (int v : values_) s += "_" + std::to_string(v);
            return s;
        }
        case Kind::Affine: {
            std::string s = "affine" + std::to_string(a_) + "_" + std::to_string(b_);
            if (cap_ > 0) s += "c" + std::to_string(cap_);
            return s;
        }
    }
    return "?";
}

}  // namespace treeberg
