#include "cmox/ensemble.hpp"

#include <algorithm>
#include <map>

#include "cmox/error.hpp"

namespace cmox {

int vote(std::span<const int> predictions) {
    if (predictions.empty()) throw Error("vote: no member predictions");
    // label -> (count, priority rank of its first proposer)
    std::map<int, std::pair<int, std::size_t>> tally;
    for (std::size_t rank = 0; rank < predictions.size(); ++rank) {
        auto [it, inserted] = tally.try_emplace(predictions[rank], 0, rank);
        ++it->second.first;
    }
    auto best = tally.begin();
    for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
        const auto& [count, rank] = it->second;
        if (count > best->second.first || (count == best->second.first && rank < best->second.second)) best = it;
    }
    return best->first;
}

EnsembleModel make_ensemble(std::vector<EnsembleMember> members) {
    if (members.size() < 2) throw Error("ensemble: at least two members required");
    auto labels_of = [](const EnsembleMember& m) {
        return std::visit([](const auto& model) -> std::vector<std::string> {
            if constexpr (std::is_same_v<std::decay_t<decltype(model)>, Tree>) {
                return {};
            } else {
                return model.labels;
            }
        }, m.model);
    };
    EnsembleModel ensemble;
    for (const auto& m : members) {
        auto labels = labels_of(m);
        if (labels.empty()) continue;
        if (ensemble.labels.empty()) {
            ensemble.labels = std::move(labels);
        } else if (labels != ensemble.labels) {
            throw Error("ensemble: member '" + m.name + "' uses a different label codebook");
        }
    }
    if (ensemble.labels.empty()) throw Error("ensemble: no member carries a label codebook");
    for (const auto& m : members) {
        if (const auto* tree = std::get_if<Tree>(&m.model); tree && tree->n_classes != static_cast<int>(ensemble.labels.size())) {
            throw Error("ensemble: member '" + m.name + "' has a different class count");
        }
    }
    ensemble.members = std::move(members);
    return ensemble;
}

EnsembleModel train_ensemble(const Dataset& data, const EnsembleConfig& config) {
    std::vector<EnsembleMember> members;
    members.push_back({"svm", train_svm(data, config.svm)});
    members.push_back({"logreg", train_logreg(data, config.logreg)});
    members.push_back({"forest", train_forest(data, config.forest)});
    members.push_back({"tree", train_tree(data, config.tree)});
    return make_ensemble(std::move(members));
}

Prediction predict_member(const EnsembleMember& member, const SparseVector& x) {
    return std::visit([&](const auto& model) -> Prediction {
        if constexpr (std::is_same_v<std::decay_t<decltype(model)>, LinearModel>) {
            return predict_linear(model, x);
        } else {
            return predict_forest(model, x);
        }
    }, member.model);
}

Prediction predict_ensemble(const EnsembleModel& model, const SparseVector& x) {
    std::vector<int> votes;
    votes.reserve(model.members.size());
    for (const auto& m : model.members) votes.push_back(predict_member(m, x).label);
    Prediction p;
    p.label = vote(votes);
    p.scores.assign(model.labels.size(), 0.0);
    for (const int v : votes) p.scores[static_cast<std::size_t>(v)] += 1.0 / static_cast<double>(votes.size());
    return p;
}

nlohmann::json encode_ensemble(const EnsembleModel& model, ModelContainer& out) {
    auto members = nlohmann::json::array();
    for (const auto& m : model.members) {
        nlohmann::json section = std::visit([&](const auto& inner) -> nlohmann::json {
            using T = std::decay_t<decltype(inner)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                return encode_linear(inner, out, m.name + "/");
            } else if constexpr (std::is_same_v<T, Forest>) {
                return encode_forest(inner);
            } else {
                auto j = encode_tree(inner);
                j["kind"] = "tree";
                return j;
            }
        }, m.model);
        section["name"] = m.name;
        members.push_back(std::move(section));
    }
    return {{"kind", "ensemble"}, {"labels", model.labels}, {"members", std::move(members)}};
}

EnsembleModel decode_ensemble(const nlohmann::json& section, const ModelContainer& in) {
    std::vector<EnsembleMember> members;
    for (const auto& m : section.at("members")) {
        const auto name = m.at("name").get<std::string>();
        const auto kind = m.at("kind").get<std::string>();
        if (kind == "logreg" || kind == "svm") {
            members.push_back({name, decode_linear(m, in, name + "/")});
        } else if (kind == "forest") {
            members.push_back({name, decode_forest(m)});
        } else if (kind == "tree") {
            members.push_back({name, decode_tree(m)});
        } else {
            throw Error("decode_ensemble: unknown member kind '" + kind + "'");
        }
    }
    auto model = make_ensemble(std::move(members));
    if (model.labels != section.at("labels").get<std::vector<std::string>>()) {
        throw Error("decode_ensemble: manifest labels disagree with members");
    }
    return model;
}

}  // namespace cmox
