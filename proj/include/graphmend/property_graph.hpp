#pragma once

// In-memory directed, labeled, attributed multigraph with the six update
// operations the repair DSL needs, snapshot semantics and a JSON interchange
// format.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "graphmend/errors.hpp"

namespace graphmend {

using NodeId = std::string;
using EdgeId = std::string;

using PropertyValue = std::variant<std::string, std::int64_t, double, bool>;
using PropertyMap = std::map<std::string, PropertyValue>;

// Display form used in prompt encodings: strings bare, floats shortest-round-trip.
std::string to_display(const PropertyValue& v);

struct Node {
    NodeId id;
    std::set<std::string> labels;
    PropertyMap properties;

    bool operator==(const Node&) const = default;
};

struct Edge {
    EdgeId id;
    NodeId src;
    NodeId dst;
    std::string type;
    PropertyMap properties;

    bool operator==(const Edge&) const = default;
};

class PropertyGraph {
public:
    PropertyGraph() = default;

    NodeId add_node(std::set<std::string> labels, PropertyMap props);
    EdgeId add_edge(const NodeId& src, const NodeId& dst, std::string type, PropertyMap props);
    void del_edge(const EdgeId& id);
    // Cascades: removes the node and every incident edge.
    void del_node(const NodeId& id);
    // Listed keys are overwritten or inserted, other keys untouched.
    void upd_node(const NodeId& id, const PropertyMap& changes);
    void upd_edge(const EdgeId& id, const PropertyMap& changes);

    bool has_node(const NodeId& id) const { return nodes_.count(id) != 0; }
    bool has_edge(const EdgeId& id) const { return edges_.count(id) != 0; }
    const Node& node(const NodeId& id) const;
    const Edge& edge(const EdgeId& id) const;

    const std::map<NodeId, Node>& nodes() const { return nodes_; }
    const std::map<EdgeId, Edge>& edges() const { return edges_; }

    // Adjacency index; empty vector for nodes with no incident edges.
    const std::vector<EdgeId>& out_edges(const NodeId& id) const;
    const std::vector<EdgeId>& in_edges(const NodeId& id) const;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    // Deep, independent copy.
    PropertyGraph snapshot() const { return *this; }

    std::string to_json() const;
    static PropertyGraph from_json(const std::string& text);

    bool operator==(const PropertyGraph& other) const {
        return nodes_ == other.nodes_ && edges_ == other.edges_;
    }

private:
    std::string fresh_id() { return std::to_string(next_id_++); }
    void index_edge(const Edge& e);
    void unindex_edge(const Edge& e);

    std::map<NodeId, Node> nodes_;
    std::map<EdgeId, Edge> edges_;
    std::map<NodeId, std::vector<EdgeId>> out_;
    std::map<NodeId, std::vector<EdgeId>> in_;
    std::uint64_t next_id_ = 0;
};

}  // namespace graphmend
