#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pg {

inline constexpr const char* kCorrespondsTo = "CORRESPONDS_TO";

struct PolicySource {
    std::string id;
    std::string title;
    std::string document_text;
};

struct Chunk {
    std::string id;
    std::string source_id;
    std::size_t start_offset = 0; // inclusive
    std::size_t end_offset = 0;   // exclusive
    std::string text;
    std::string boundary_reason;
};

struct Entity {
    std::string id;
    std::string name;
    std::string entity_type;
    std::string description;
    std::string article_ref;  // may be empty
    std::string policy_quote; // may be empty
    std::string source_id;
    std::string source_chunk_id;
    std::optional<std::vector<double>> embedding;
};

struct Relation {
    std::string id;
    std::string relation_type;
    std::string source_entity_id;
    std::string target_entity_id;
    std::string description;
    std::optional<double> similarity; // set only on CORRESPONDS_TO edges
};

enum class SchemaMode { Closed, Open };

struct DirectionRule {
    std::string relation_type;
    std::string source_type;
    std::string target_type;
};

// Vocabulary of the active ontology. Closed vocabularies are fixed at
// construction; open vocabularies grow as labels are observed.
class OntologySchema {
public:
    OntologySchema() = default;
    static OntologySchema closed(std::vector<std::string> entity_types,
                                 std::vector<DirectionRule> rules);
    static OntologySchema open();

    SchemaMode mode() const { return mode_; }
    const std::set<std::string>& entity_types() const { return entity_types_; }
    const std::set<std::string>& relation_types() const { return relation_types_; }
    const std::vector<DirectionRule>& direction_rules() const { return direction_rules_; }

    bool has_entity_type(const std::string& label) const { return entity_types_.count(label) > 0; }

    // Open mode only; closed vocabularies never change.
    void observe_entity_type(const std::string& label);
    void observe_relation_type(const std::string& label);

private:
    SchemaMode mode_ = SchemaMode::Closed;
    std::set<std::string> entity_types_;
    std::set<std::string> relation_types_;
    std::vector<DirectionRule> direction_rules_;
};

// The seven AIRO-derived entity types and six direction-ruled relations used
// when no schema file overrides them.
OntologySchema default_closed_schema();

// Closed mode: true iff a direction rule matches the triple exactly.
// Open mode: always true. CORRESPONDS_TO is accepted in both modes for any
// typed pair (the cross-source constraint is checked at the graph level).
bool validate_relation(const OntologySchema& schema, const std::string& rel_type,
                       const std::string& src_type, const std::string& dst_type);

struct Violation {
    std::string subject_id;
    std::string rule;
    std::string detail;
};

struct ChunkStore; // persistence.hpp

class KnowledgeGraph {
public:
    KnowledgeGraph() : schema_(default_closed_schema()) {}
    explicit KnowledgeGraph(OntologySchema schema) : schema_(std::move(schema)) {}

    const OntologySchema& schema() const { return schema_; }
    OntologySchema& schema() { return schema_; }

    const std::map<std::string, Entity>& entities() const { return entities_; }
    const std::map<std::string, Relation>& relations() const { return relations_; }
    const std::map<std::string, std::vector<std::string>>& out_index() const { return out_index_; }
    const std::map<std::string, std::vector<std::string>>& in_index() const { return in_index_; }
    const std::map<std::string, std::size_t>& entity_type_counts() const { return entity_type_counts_; }
    const std::map<std::string, std::size_t>& relation_type_counts() const { return relation_type_counts_; }

    // Entity insertion order; recency for incremental extraction context.
    const std::vector<std::string>& entity_order() const { return entity_order_; }

    bool has_entity(const std::string& id) const { return entities_.count(id) > 0; }
    const Entity& entity(const std::string& id) const; // throws not_found
    Entity& entity_mut(const std::string& id);
    const Relation& relation(const std::string& id) const;

    std::vector<std::string> source_ids() const;
    std::size_t degree(const std::string& entity_id) const;

    // Adjacent entity ids (undirected, deduplicated, id order).
    std::vector<std::string> neighbors(const std::string& entity_id) const;

    // Incident relation ids, id order.
    std::vector<std::string> incident_relations(const std::string& entity_id) const;

    void add_entity(Entity entity); // throws on duplicate id / bad type
    // Returns an error reason instead of inserting when the relation violates
    // endpoint, self-loop, schema-direction or cross-source rules.
    std::optional<std::string> try_add_relation(Relation relation);
    void add_relation(Relation relation); // throws on rejection

    void remove_entity(const std::string& id);   // also drops incident relations
    void remove_relation(const std::string& id);

    // Re-points every relation endpoint from `from` onto `to`, dropping edges
    // that would become self-loops or exact duplicates. Returns dropped ids.
    std::vector<std::string> repoint_relations(const std::string& from, const std::string& to);

    std::string allocate_entity_id(const std::string& source_id);
    std::string allocate_relation_id(const std::string& source_id);

    std::vector<Violation> verify() const;
    std::vector<Violation> verify(const ChunkStore& chunks) const;

private:
    void index_relation(const Relation& rel);
    void unindex_relation(const Relation& rel);

    OntologySchema schema_;
    std::map<std::string, Entity> entities_;
    std::map<std::string, Relation> relations_;
    std::map<std::string, std::vector<std::string>> out_index_;
    std::map<std::string, std::vector<std::string>> in_index_;
    std::map<std::string, std::size_t> entity_type_counts_;
    std::map<std::string, std::size_t> relation_type_counts_;
    std::vector<std::string> entity_order_;
    std::map<std::string, std::size_t> next_entity_ordinal_;
    std::map<std::string, std::size_t> next_relation_ordinal_;
};

// Violations of every graph-level invariant: closed/open type rules, dangling
// endpoints, self-loops, direction rules, cross-source CORRESPONDS_TO,
// similarity range and index consistency. Empty means the graph is valid.
std::vector<Violation> verify_graph(const KnowledgeGraph& graph);
std::vector<Violation> verify_graph(const KnowledgeGraph& graph, const ChunkStore& chunks);

} // namespace pg
