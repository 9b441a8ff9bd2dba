#include "graphmend/property_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <json.hpp>

namespace graphmend {

using nlohmann::json;

std::string to_display(const PropertyValue& v) {
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), std::get<double>(v));
    return std::string(buf, p);
}

NodeId PropertyGraph::add_node(std::set<std::string> labels, PropertyMap props) {
    NodeId id = fresh_id();
    nodes_.emplace(id, Node{id, std::move(labels), std::move(props)});
    return id;
}

EdgeId PropertyGraph::add_edge(const NodeId& src, const NodeId& dst, std::string type,
                               PropertyMap props) {
    if (!has_node(src)) throw UnknownNode(src);
    if (!has_node(dst)) throw UnknownNode(dst);
    EdgeId id = fresh_id();
    Edge e{id, src, dst, std::move(type), std::move(props)};
    index_edge(e);
    edges_.emplace(id, std::move(e));
    return id;
}

void PropertyGraph::del_edge(const EdgeId& id) {
    auto it = edges_.find(id);
    if (it == edges_.end()) throw UnknownEdge(id);
    unindex_edge(it->second);
    edges_.erase(it);
}

void PropertyGraph::del_node(const NodeId& id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw UnknownNode(id);
    std::vector<EdgeId> incident;
    if (auto o = out_.find(id); o != out_.end())
        incident.insert(incident.end(), o->second.begin(), o->second.end());
    if (auto i = in_.find(id); i != in_.end())
        incident.insert(incident.end(), i->second.begin(), i->second.end());
    for (const EdgeId& eid : incident) {
        if (edges_.count(eid)) del_edge(eid);  // self-loop appears in both lists
    }
    out_.erase(id);
    in_.erase(id);
    nodes_.erase(it);
}

void PropertyGraph::upd_node(const NodeId& id, const PropertyMap& changes) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw UnknownNode(id);
    for (const auto& [k, v] : changes) it->second.properties[k] = v;
}

void PropertyGraph::upd_edge(const EdgeId& id, const PropertyMap& changes) {
    auto it = edges_.find(id);
    if (it == edges_.end()) throw UnknownEdge(id);
    for (const auto& [k, v] : changes) it->second.properties[k] = v;
}

const Node& PropertyGraph::node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw UnknownNode(id);
    return it->second;
}

const Edge& PropertyGraph::edge(const EdgeId& id) const {
    auto it = edges_.find(id);
    if (it == edges_.end()) throw UnknownEdge(id);
    return it->second;
}

const std::vector<EdgeId>& PropertyGraph::out_edges(const NodeId& id) const {
    static const std::vector<EdgeId> empty;
    auto it = out_.find(id);
    return it == out_.end() ? empty : it->second;
}

const std::vector<EdgeId>& PropertyGraph::in_edges(const NodeId& id) const {
    static const std::vector<EdgeId> empty;
    auto it = in_.find(id);
    return it == in_.end() ? empty : it->second;
}

void PropertyGraph::index_edge(const Edge& e) {
    out_[e.src].push_back(e.id);
    in_[e.dst].push_back(e.id);
}

void PropertyGraph::unindex_edge(const Edge& e) {
    auto erase_from = [](std::vector<EdgeId>& v, const EdgeId& id) {
        v.erase(std::remove(v.begin(), v.end(), id), v.end());
    };
    if (auto it = out_.find(e.src); it != out_.end()) erase_from(it->second, e.id);
    if (auto it = in_.find(e.dst); it != in_.end()) erase_from(it->second, e.id);
}

namespace {

json value_to_json(const PropertyValue& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

PropertyValue value_from_json(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer() || j.is_number_unsigned()) return j.get<std::int64_t>();
    if (j.is_number_float()) {
        double d = j.get<double>();
        if (!std::isfinite(d)) throw ParseError("non-finite float property value");
        return d;
    }
    throw ParseError("property value must be string, number or boolean, got " +
                     std::string(j.type_name()));
}

json props_to_json(const PropertyMap& props) {
    json out = json::object();
    for (const auto& [k, v] : props) out[k] = value_to_json(v);
    return out;
}

PropertyMap props_from_json(const json& j, const char* where) {
    if (!j.is_object()) throw ParseError(std::string(where) + ": properties must be an object");
    PropertyMap out;
    for (const auto& [k, v] : j.items()) out.emplace(k, value_from_json(v));
    return out;
}

// Interchange ids are opaque strings; bare integers are normalized to strings.
std::string id_from_json(const json& j, const char* where) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer() || j.is_number_unsigned())
        return std::to_string(j.get<std::int64_t>());
    throw ParseError(std::string(where) + ": id must be a string or integer");
}

}  // namespace

std::string PropertyGraph::to_json() const {
    json out;
    out["nodes"] = json::array();
    for (const auto& [id, n] : nodes_) {
        json jn;
        jn["id"] = id;
        jn["labels"] = json::array();
        for (const auto& l : n.labels) jn["labels"].push_back(l);
        jn["properties"] = props_to_json(n.properties);
        out["nodes"].push_back(std::move(jn));
    }
    out["edges"] = json::array();
    for (const auto& [id, e] : edges_) {
        json je;
        je["id"] = id;
        je["src"] = e.src;
        je["dst"] = e.dst;
        je["type"] = e.type;
        je["properties"] = props_to_json(e.properties);
        out["edges"].push_back(std::move(je));
    }
    return out.dump(2);
}

PropertyGraph PropertyGraph::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("graph json: " + std::string(e.what()));
    }
    if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
        throw ParseError("graph json: expected object with \"nodes\" and \"edges\"");

    PropertyGraph g;
    std::uint64_t max_numeric = 0;
    auto track = [&max_numeric](const std::string& id) {
        std::uint64_t n = 0;
        auto [p, ec] = std::from_chars(id.data(), id.data() + id.size(), n);
        if (ec == std::errc() && p == id.data() + id.size())
            max_numeric = std::max(max_numeric, n + 1);
    };

    for (const auto& jn : j["nodes"]) {
        std::string id = id_from_json(jn.at("id"), "node");
        if (g.nodes_.count(id)) throw ParseError("duplicate node id: " + id);
        Node n;
        n.id = id;
        if (jn.contains("labels"))
            for (const auto& l : jn["labels"]) n.labels.insert(l.get<std::string>());
        if (jn.contains("properties")) n.properties = props_from_json(jn["properties"], "node");
        track(id);
        g.nodes_.emplace(id, std::move(n));
    }
    for (const auto& je : j["edges"]) {
        std::string id = id_from_json(je.at("id"), "edge");
        if (g.edges_.count(id)) throw ParseError("duplicate edge id: " + id);
        if (g.nodes_.count(id)) throw ParseError("edge id collides with node id: " + id);
        Edge e;
        e.id = id;
        e.src = id_from_json(je.at("src"), "edge src");
        e.dst = id_from_json(je.at("dst"), "edge dst");
        e.type = je.at("type").get<std::string>();
        if (je.contains("properties")) e.properties = props_from_json(je["properties"], "edge");
        if (!g.nodes_.count(e.src)) throw ParseError("edge " + id + " references missing node " + e.src);
        if (!g.nodes_.count(e.dst)) throw ParseError("edge " + id + " references missing node " + e.dst);
        track(id);
        g.index_edge(e);
        g.edges_.emplace(id, std::move(e));
    }
    g.next_id_ = max_numeric;
    return g;
}

}  // namespace graphmend
