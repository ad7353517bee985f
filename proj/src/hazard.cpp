#include "cpsrisk/hazard.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <limits>
#include <sstream>

namespace cpsrisk {

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

std::vector<std::size_t> bfs_distances(const HybridAutomaton& model, std::size_t root) {
    std::vector<std::size_t> dist(model.modes.size(), kUnreached);
    std::deque<std::size_t> queue{root};
    dist[root] = 0;
    while (!queue.empty()) {
        const std::size_t m = queue.front();
        queue.pop_front();
        for (const auto& t : model.transitions) {
            if (t.source == m && dist[t.target] == kUnreached) {
                dist[t.target] = dist[m] + 1;
                queue.push_back(t.target);
            }
        }
    }
    return dist;
}

}  // namespace

std::string ActuatorAction::leaf_name() const {
    const char sys = system == "SIS" ? 'S' : 'B';
    const char act = action.empty() ? '?' : static_cast<char>(std::toupper(action[0]));
    std::ostringstream os;
    os << sys << "(" << device << "_" << act << ")";
    return os.str();
}

HazardTree hazard_tree(const HybridAutomaton& model, const Mode& root,
                       const std::set<std::string>& hazardous) {
    const auto root_idx = model.mode_index(root.id);
    if (!root_idx) throw Error("hazard_tree: unknown root mode '" + root.id + "'");

    const auto dist = bfs_distances(model, *root_idx);

    std::vector<std::string> unreachable;
    for (const auto& h : hazardous) {
        auto hi = model.mode_index(h);
        if (!hi || dist[*hi] == kUnreached) unreachable.push_back(h);
    }
    if (!unreachable.empty()) {
        std::ostringstream os;
        os << "hazardous modes unreachable from '" << root.id << "':";
        for (const auto& h : unreachable) os << " " << h;
        throw UnreachableHazard(os.str());
    }

    auto is_hazardous = [&](std::size_t i) { return hazardous.count(model.modes[i].id) != 0; };

    // Shortest-path predecessor per node: among predecessors one step closer
    // to the root, prefer a non-hazardous one, then the earliest declared.
    std::vector<std::size_t> parent(model.modes.size(), kUnreached);
    std::vector<std::size_t> parent_event(model.modes.size(), kUnreached);
    for (std::size_t m = 0; m < model.modes.size(); ++m) {
        if (m == *root_idx || dist[m] == kUnreached) continue;
        std::size_t best = kUnreached, best_event = kUnreached;
        for (const auto& t : model.transitions) {
            if (t.target != m || dist[t.source] != dist[m] - 1) continue;
            if (best == kUnreached) {
                best = t.source;
                best_event = t.event;
                continue;
            }
            const bool cand_safe = !is_hazardous(t.source);
            const bool best_safe = !is_hazardous(best);
            if ((cand_safe && !best_safe) ||
                (cand_safe == best_safe && t.source < best)) {
                best = t.source;
                best_event = t.event;
            }
        }
        parent[m] = best;
        parent_event[m] = best_event;
    }

    // merge the root-to-hazard paths
    std::set<std::size_t> in_tree{*root_idx};
    for (const auto& h : hazardous) {
        std::size_t cur = *model.mode_index(h);
        while (cur != *root_idx) {
            in_tree.insert(cur);
            cur = parent[cur];
        }
    }

    HazardTree tree;
    tree.root = root.id;
    for (const auto& m : model.modes) tree.mode_order.push_back(m.id);
    tree.adjacency.assign(model.modes.size(), std::vector<int>(model.modes.size(), 0));

    std::vector<std::size_t> ordered(in_tree.begin(), in_tree.end());
    std::sort(ordered.begin(), ordered.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    });
    for (const std::size_t m : ordered) {
        const std::string& id = model.modes[m].id;
        tree.nodes.push_back(id);
        tree.depth[id] = static_cast<int>(dist[m]);
        if (m == *root_idx) continue;
        const std::string& pid = model.modes[parent[m]].id;
        const std::string& label = model.events[parent_event[m]].actuator_label;
        tree.edges.push_back({pid, label, id});
        tree.parent[id] = pid;
        tree.parent_label[id] = label;
        tree.adjacency[parent[m]][m] = 1;
    }
    for (const std::size_t m : ordered)
        if (is_hazardous(m)) tree.hazard_leaves.push_back(model.modes[m].id);
    return tree;
}

std::vector<Trace> traces(const HazardTree& tree) {
    std::vector<Trace> out;
    for (const auto& leaf : tree.hazard_leaves) {
        Trace tr;
        std::string cur = leaf;
        while (cur != tree.root) {
            tr.modes.push_back(cur);
            tr.labels.push_back(tree.parent_label.at(cur));
            cur = tree.parent.at(cur);
        }
        tr.modes.push_back(tree.root);
        std::reverse(tr.modes.begin(), tr.modes.end());
        std::reverse(tr.labels.begin(), tr.labels.end());
        std::ostringstream os;
        os << tr.modes[0];
        for (std::size_t i = 0; i < tr.labels.size(); ++i)
            os << " -[" << tr.labels[i] << "]-> " << tr.modes[i + 1];
        tr.rendered = os.str();
        out.push_back(std::move(tr));
    }
    return out;
}

namespace {

std::vector<std::string> split_label(const std::string& label, const std::string& sep) {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = label.find(sep, pos);
        std::string tok = label.substr(pos, next == std::string::npos ? next : next - pos);
        // trim
        const auto b = tok.find_first_not_of(" \t");
        const auto e = tok.find_last_not_of(" \t");
        tokens.push_back(b == std::string::npos ? std::string() : tok.substr(b, e - b + 1));
        if (next == std::string::npos) break;
        pos = next + sep.size();
    }
    return tokens;
}

AttackNode step_node(const std::string& label, const ActuatorMap& map, std::size_t trace_i,
                     std::size_t step_i) {
    const bool has_or = label.find("||") != std::string::npos;
    const bool has_and = label.find('&') != std::string::npos && !has_or;
    if (label.find("||") != std::string::npos && label.find('&') != std::string::npos)
        throw UnmappedActuator("label '" + label + "' mixes || and & connectors");

    std::vector<std::string> tokens =
        has_or ? split_label(label, "||") : has_and ? split_label(label, "&")
                                                    : std::vector<std::string>{label};
    std::ostringstream prefix;
    prefix << "t" << trace_i << ".s" << step_i;

    std::vector<AttackNode> leaves;
    for (const auto& tok : tokens) {
        auto it = map.entries.find(tok);
        if (it == map.entries.end())
            throw UnmappedActuator("actuator label '" + tok + "' has no cyber-action mapping");
        AttackNode leaf = AttackNode::basic(it->second.leaf_name(),
                                            it->second.system + " " + it->second.action + " " +
                                                it->second.device + " (trace " +
                                                std::to_string(trace_i) + ", step " +
                                                std::to_string(step_i) + ")");
        leaf.id = prefix.str() + "." + leaf.var;
        leaves.push_back(std::move(leaf));
    }
    if (leaves.size() == 1) return leaves[0];
    return has_or ? AttackNode::or_(prefix.str(), std::move(leaves))
                  : AttackNode::and_(prefix.str(), std::move(leaves));
}

}  // namespace

AttackNode abstract_attack_tree(const HazardTree& tree, const ActuatorMap& map) {
    std::vector<AttackNode> children;
    const auto all = traces(tree);
    for (std::size_t ti = 0; ti < all.size(); ++ti) {
        const Trace& tr = all[ti];
        std::vector<AttackNode> steps;
        for (std::size_t si = 0; si < tr.labels.size(); ++si)
            steps.push_back(step_node(tr.labels[si], map, ti, si));
        if (steps.size() == 1)
            children.push_back(std::move(steps[0]));
        else
            children.push_back(AttackNode::and_("t" + std::to_string(ti), std::move(steps)));
    }
    AttackNode root = AttackNode::or_("hazard", std::move(children));
    root.description = "process hazard reached through any execution trace";
    return root;
}

}  // namespace cpsrisk
