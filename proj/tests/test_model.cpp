#include <doctest.h>

#include <policygraph/chunk_store.hpp>
#include <policygraph/error.hpp>
#include <policygraph/model.hpp>
#include <policygraph/text_util.hpp>

#include <string>
#include <vector>

using namespace pg;

namespace {

Entity ent(std::string id, std::string name, std::string type, std::string source) {
    Entity e;
    e.id = std::move(id);
    e.name = std::move(name);
    e.entity_type = std::move(type);
    e.source_id = std::move(source);
    return e;
}

Relation rel(std::string id, std::string type, std::string src, std::string dst) {
    Relation r;
    r.id = std::move(id);
    r.relation_type = std::move(type);
    r.source_entity_id = std::move(src);
    r.target_entity_id = std::move(dst);
    return r;
}

// One entity of every closed type, two sources for cross-source checks.
KnowledgeGraph seeded_graph() {
    KnowledgeGraph g;
    g.add_entity(ent("a_e0001", "screening system", "AI_SYSTEM", "a"));
    g.add_entity(ent("a_e0002", "bias risk", "RISK", "a"));
    g.add_entity(ent("a_e0003", "unfair rejection", "CONSEQUENCE", "a"));
    g.add_entity(ent("a_e0004", "human review", "RISK_CONTROL", "a"));
    g.add_entity(ent("a_e0005", "job applicant", "STAKEHOLDER", "a"));
    g.add_entity(ent("a_e0006", "candidate ranking", "PURPOSE", "a"));
    g.add_entity(ent("a_e0007", "model act", "REGULATION", "a"));
    g.add_entity(ent("b_e0001", "bias hazard", "RISK", "b"));
    return g;
}

} // namespace

TEST_CASE("default closed schema vocabulary") {
    OntologySchema s = default_closed_schema();
    CHECK(s.mode() == SchemaMode::Closed);
    CHECK(s.entity_types() == std::set<std::string>{"AI_SYSTEM", "CONSEQUENCE", "PURPOSE",
                                                    "REGULATION", "RISK", "RISK_CONTROL",
                                                    "STAKEHOLDER"});
    CHECK(s.relation_types().count("CORRESPONDS_TO") == 1);
    CHECK(s.relation_types().size() == 7);
    CHECK(s.direction_rules().size() == 6);
    CHECK_THROWS_AS(s.observe_entity_type("gadget"), Error);
    CHECK_THROWS_AS(s.observe_relation_type("uses"), Error);
}

TEST_CASE("validate_relation enforces direction in closed mode") {
    OntologySchema s = default_closed_schema();
    struct Case {
        const char* rel;
        const char* src;
        const char* dst;
        bool ok;
    };
    const Case cases[] = {
        {"MITIGATES", "RISK_CONTROL", "RISK", true},
        {"MITIGATES", "RISK", "RISK_CONTROL", false}, // inverted
        {"HAS_CONSEQUENCE", "RISK", "CONSEQUENCE", true},
        {"HAS_CONSEQUENCE", "CONSEQUENCE", "RISK", false},
        {"HAS_RISK", "AI_SYSTEM", "RISK", true},
        {"HAS_RISK", "RISK", "AI_SYSTEM", false},
        {"HAS_PURPOSE", "AI_SYSTEM", "PURPOSE", true},
        {"HAS_PURPOSE", "PURPOSE", "AI_SYSTEM", false},
        {"AFFECTS", "RISK", "STAKEHOLDER", true},
        {"AFFECTS", "STAKEHOLDER", "RISK", false},
        {"REGULATED_BY", "AI_SYSTEM", "REGULATION", true},
        {"REGULATED_BY", "REGULATION", "AI_SYSTEM", false},
        {"MITIGATES", "RISK_CONTROL", "CONSEQUENCE", false}, // wrong target
        {"HAS_RISK", "AI_SYSTEM", "CONSEQUENCE", false},
        {"SUPERVISES", "REGULATION", "AI_SYSTEM", false}, // unknown type
        // CORRESPONDS_TO accepts any typed pair at schema level.
        {"CORRESPONDS_TO", "RISK", "RISK", true},
        {"CORRESPONDS_TO", "RISK", "AI_SYSTEM", true},
        {"CORRESPONDS_TO", "REGULATION", "PURPOSE", true},
    };
    for (const auto& c : cases) {
        CAPTURE(c.rel);
        CAPTURE(c.src);
        CAPTURE(c.dst);
        CHECK(validate_relation(s, c.rel, c.src, c.dst) == c.ok);
    }
}

TEST_CASE("open schema accepts and grows any normalized vocabulary") {
    OntologySchema s = OntologySchema::open();
    CHECK(s.mode() == SchemaMode::Open);
    CHECK(s.entity_types().empty());
    s.observe_entity_type("ai_system");
    s.observe_entity_type("novel_widget");
    CHECK(s.entity_types() == std::set<std::string>{"ai_system", "novel_widget"});
    s.observe_relation_type("depends_on");
    CHECK(s.relation_types().count("depends_on") == 1);
    CHECK(validate_relation(s, "depends_on", "ai_system", "novel_widget"));
    CHECK(validate_relation(s, "never_seen", "x", "y")); // open mode: always true
}

TEST_CASE("add_entity validation") {
    KnowledgeGraph g;
    g.add_entity(ent("a_e0001", "thing", "RISK", "a"));
    CHECK_THROWS_AS(g.add_entity(ent("a_e0001", "again", "RISK", "a")), Error);
    CHECK_THROWS_AS(g.add_entity(ent("a_e0002", "", "RISK", "a")), Error);
    CHECK_THROWS_AS(g.add_entity(ent("", "thing", "RISK", "a")), Error);
    CHECK_THROWS_AS(g.add_entity(ent("a_e0002", "thing", "GADGET", "a")), Error);
    CHECK(g.entities().size() == 1);
    CHECK(g.entity_type_counts().at("RISK") == 1);
}

TEST_CASE("try_add_relation rejects every invalid shape") {
    KnowledgeGraph g = seeded_graph();
    CHECK(g.try_add_relation(rel("a_r0001", "MITIGATES", "a_e0004", "a_e0002")) == std::nullopt);
    // Duplicate id.
    CHECK(g.try_add_relation(rel("a_r0001", "HAS_RISK", "a_e0001", "a_e0002")).has_value());
    // Dangling endpoints.
    CHECK(g.try_add_relation(rel("a_r0002", "HAS_RISK", "a_e0099", "a_e0002")).has_value());
    CHECK(g.try_add_relation(rel("a_r0002", "HAS_RISK", "a_e0001", "a_e0099")).has_value());
    // Self-loop.
    CHECK(g.try_add_relation(rel("a_r0002", "CORRESPONDS_TO", "a_e0002", "a_e0002")).has_value());
    // Inverted direction.
    CHECK(g.try_add_relation(rel("a_r0002", "MITIGATES", "a_e0002", "a_e0004")).has_value());
    // Similarity on a non-correspondence edge.
    Relation bad = rel("a_r0002", "HAS_RISK", "a_e0001", "a_e0002");
    bad.similarity = 0.9;
    CHECK(g.try_add_relation(bad).has_value());
    // CORRESPONDS_TO within one source.
    CHECK(g.try_add_relation(rel("a_r0002", "CORRESPONDS_TO", "a_e0002", "a_e0003")).has_value());
    // CORRESPONDS_TO across sources with out-of-range similarity.
    Relation corr = rel("corr_1", "CORRESPONDS_TO", "a_e0002", "b_e0001");
    corr.similarity = 1.5;
    CHECK(g.try_add_relation(corr).has_value());
    corr.similarity = 0.93;
    CHECK(g.try_add_relation(corr) == std::nullopt);
    CHECK(g.relations().size() == 2);
    CHECK(g.verify().empty());
    CHECK_THROWS_AS(g.add_relation(rel("a_r0001", "HAS_RISK", "a_e0001", "a_e0002")), Error);
}

TEST_CASE("indexes, degree and neighbors stay consistent") {
    KnowledgeGraph g = seeded_graph();
    g.add_relation(rel("a_r0001", "HAS_RISK", "a_e0001", "a_e0002"));
    g.add_relation(rel("a_r0002", "HAS_CONSEQUENCE", "a_e0002", "a_e0003"));
    g.add_relation(rel("a_r0003", "MITIGATES", "a_e0004", "a_e0002"));
    g.add_relation(rel("a_r0004", "AFFECTS", "a_e0002", "a_e0005"));
    CHECK(g.degree("a_e0002") == 4);
    CHECK(g.neighbors("a_e0002") ==
          std::vector<std::string>{"a_e0001", "a_e0003", "a_e0004", "a_e0005"});
    CHECK(g.incident_relations("a_e0002") ==
          std::vector<std::string>{"a_r0001", "a_r0002", "a_r0003", "a_r0004"});
    CHECK(g.relation_type_counts().at("HAS_RISK") == 1);

    g.remove_relation("a_r0002");
    CHECK(g.degree("a_e0002") == 3);
    CHECK(g.neighbors("a_e0002") == std::vector<std::string>{"a_e0001", "a_e0004", "a_e0005"});
    CHECK(g.relation_type_counts().count("HAS_CONSEQUENCE") == 0);

    g.remove_entity("a_e0002"); // drops the three remaining incident edges
    CHECK(g.relations().empty());
    CHECK(g.degree("a_e0001") == 0);
    CHECK(g.entity_type_counts().count("RISK") == 1); // b_e0001 remains
    CHECK_THROWS_AS((void)g.entity("a_e0002"), Error);
    CHECK(g.verify().empty());
}

TEST_CASE("source_ids and entity_order") {
    KnowledgeGraph g = seeded_graph();
    CHECK(g.source_ids() == std::vector<std::string>{"a", "b"});
    CHECK(g.entity_order().front() == "a_e0001");
    CHECK(g.entity_order().back() == "b_e0001");
    CHECK(g.entity_order().size() == 8);
}

TEST_CASE("id allocation is per-source, 1-based, gap-aware") {
    KnowledgeGraph g;
    CHECK(g.allocate_entity_id("src") == "src_e0001");
    g.add_entity(ent("src_e0001", "one", "RISK", "src"));
    CHECK(g.allocate_entity_id("src") == "src_e0002");
    CHECK(g.allocate_entity_id("other") == "other_e0001");
    // Inserting a high ordinal bumps the allocator past it.
    g.add_entity(ent("src_e0007", "seven", "RISK", "src"));
    CHECK(g.allocate_entity_id("src") == "src_e0008");
    g.add_entity(ent("src_e0008", "eight", "AI_SYSTEM", "src"));
    CHECK(g.allocate_relation_id("src") == "src_r0001");
    g.add_relation(rel("src_r0001", "HAS_RISK", "src_e0008", "src_e0001"));
    CHECK(g.allocate_relation_id("src") == "src_r0002");
}

TEST_CASE("repoint_relations drops self-loops and duplicates") {
    KnowledgeGraph g = seeded_graph();
    g.add_entity(ent("a_e0008", "bias risk copy", "RISK", "a"));
    g.add_relation(rel("a_r0001", "HAS_RISK", "a_e0001", "a_e0002"));
    g.add_relation(rel("a_r0002", "HAS_RISK", "a_e0001", "a_e0008"));     // becomes duplicate
    g.add_relation(rel("a_r0003", "MITIGATES", "a_e0004", "a_e0008"));    // survives, re-pointed
    g.add_relation(rel("corr_x", "CORRESPONDS_TO", "a_e0008", "b_e0001")); // survives
    auto dropped = g.repoint_relations("a_e0008", "a_e0002");
    CHECK(dropped == std::vector<std::string>{"a_r0002"});
    CHECK(g.relation("a_r0003").target_entity_id == "a_e0002");
    CHECK(g.relation("corr_x").source_entity_id == "a_e0002");
    g.remove_entity("a_e0008");
    CHECK(g.verify().empty());
}

TEST_CASE("verify reports hand-broken invariants") {
    KnowledgeGraph g = seeded_graph();
    g.add_relation(rel("a_r0001", "HAS_RISK", "a_e0001", "a_e0002"));
    CHECK(g.verify().empty());
    // Mutating a type under an existing edge breaks both the type rule and the
    // direction rule.
    g.entity_mut("a_e0002").entity_type = "HAZARD";
    auto violations = g.verify();
    REQUIRE_FALSE(violations.empty());
    bool type_issue = false;
    bool schema_issue = false;
    for (const auto& v : violations) {
        if (v.subject_id == "a_e0002" && v.rule == "entity_type") type_issue = true;
        if (v.subject_id == "a_r0001" && v.rule == "schema") schema_issue = true;
    }
    CHECK(type_issue);
    CHECK(schema_issue);
    // Violations come back sorted by subject id.
    for (std::size_t i = 1; i < violations.size(); ++i)
        CHECK(violations[i - 1].subject_id <= violations[i].subject_id);
}

TEST_CASE("verify against a chunk store checks provenance") {
    KnowledgeGraph g;
    Entity e = ent("a_e0001", "thing", "RISK", "a");
    e.source_chunk_id = "a_c0001";
    g.add_entity(e);

    ChunkStore chunks;
    SourceMeta meta;
    meta.id = "a";
    meta.title = "A";
    chunks.add_source(meta);
    Chunk c;
    c.id = "a_c0001";
    c.source_id = "a";
    c.text = "body";
    c.end_offset = 4;
    chunks.add_chunk(c);
    CHECK(g.verify(chunks).empty());

    g.entity_mut("a_e0001").source_chunk_id = "a_c0099";
    auto violations = g.verify(chunks);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule == "chunk_ref");

    g.entity_mut("a_e0001").source_chunk_id = "a_c0001";
    g.entity_mut("a_e0001").source_id = "zzz";
    violations = g.verify(chunks);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule == "source_ref");
}

TEST_CASE("open-mode graph observes vocabulary and rejects raw labels") {
    KnowledgeGraph g{OntologySchema::open()};
    g.add_entity(ent("a_e0001", "ranker", "ai_system", "a"));
    g.add_entity(ent("a_e0002", "drift", "model_hazard", "a"));
    CHECK(g.schema().entity_types() == std::set<std::string>{"ai_system", "model_hazard"});
    g.add_relation(rel("a_r0001", "suffers_from", "a_e0001", "a_e0002"));
    CHECK(g.schema().relation_types().count("suffers_from") == 1);
    CHECK(g.verify().empty());
    // verify flags un-normalized open labels.
    g.entity_mut("a_e0002").entity_type = "Model Hazard";
    bool flagged = false;
    for (const auto& v : g.verify())
        if (v.rule == "entity_type") flagged = true;
    CHECK(flagged);
}
