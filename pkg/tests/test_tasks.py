import itertools
import json

import numpy as np
import pytest

from skillcomp.distributions import dist_from_spec
from skillcomp.rng import make_rng
from skillcomp.tasks import (
    S5_SIZE,
    GsmGenerationError,
    PermutationS5,
    all_permutations,
    eval_arithmetic,
    eval_dag,
    follow_relations,
    gen_arithmetic,
    gen_gsm,
    gen_multihop_qa,
    gen_relation_graph,
    gen_state_tracking,
    perm_rank,
    read_jsonl,
    s5_compose,
    s5_identity,
    s5_inverse,
    skill_histogram,
    tokenize_expression,
    write_dataset,
    write_jsonl,
)
from skillcomp.tasks.gsm import GSM_OPS
from skillcomp.tasks.wordlists import ENTITY_NAMES, RELATION_NAMES

from oracles import (
    binomial_band,
    eval_dag_recursive,
    python_eval_arithmetic,
    traverse_by_name,
)


class TestS5Group:
    def test_identity_is_neutral(self):
        ident = s5_identity()
        g = PermutationS5((2, 1, 4, 3, 5))
        assert s5_compose(ident, g) == g
        assert s5_compose(g, ident) == g

    def test_transposition_is_involution(self):
        g = PermutationS5((1, 3, 2, 4, 5))
        assert s5_compose(g, g) == s5_identity()

    def test_reading_order_composition(self):
        # identity then the swap of positions 2 and 3 gives the swap
        assert s5_compose(s5_identity(), PermutationS5((1, 3, 2, 4, 5))).mapping == (1, 3, 2, 4, 5)

    def test_applies_left_factor_first(self):
        g = PermutationS5((2, 3, 4, 5, 1))
        h = PermutationS5((1, 3, 2, 4, 5))
        comp = s5_compose(g, h)
        for x in range(1, 6):
            assert comp(x) == h(g(x))

    def test_group_laws_all_elements(self):
        ident = s5_identity()
        elements = all_permutations()
        assert len(elements) == S5_SIZE
        for g in elements:
            assert s5_compose(g, s5_inverse(g)) == ident
            assert s5_compose(s5_inverse(g), g) == ident
            assert s5_compose(g, ident) == g

    def test_associativity_random_triples(self):
        elements = all_permutations()
        rng = make_rng(0, "assoc")
        for _ in range(1000):
            g, h, f = (elements[i] for i in rng.integers(0, S5_SIZE, size=3))
            assert s5_compose(s5_compose(g, h), f) == s5_compose(g, s5_compose(h, f))

    def test_lexicographic_order(self):
        elements = all_permutations()
        assert elements[0] == s5_identity()
        assert elements[-1].mapping == (5, 4, 3, 2, 1)
        mappings = [g.mapping for g in elements]
        assert mappings == sorted(mappings)
        for i, g in enumerate(elements):
            assert perm_rank(g) == i

    def test_rejects_non_permutation(self):
        with pytest.raises(ValueError):
            PermutationS5((1, 1, 2, 3, 4))


class TestStateTracking:
    def _dist(self, **kw):
        spec = {"kind": "zipf", "d": 120, "alpha": 1.5, "ordering": "identity"}
        spec.update(kw)
        return dist_from_spec(spec)

    def test_single_hop_echoes_input(self):
        recs = gen_state_tracking(1, self._dist(), 20, make_rng(1, "st"))
        for rec in recs:
            assert rec["prompt"] == rec["answer"]

    def test_targets_are_valid_permutations(self):
        recs = gen_state_tracking(4, self._dist(), 50, make_rng(2, "st"))
        for rec in recs:
            target = rec["meta"]["target_tokens"]
            assert sorted(target) == [1, 2, 3, 4, 5]
            assert len(rec["meta"]["input_tokens"]) == 5 * rec["meta"]["k"]

    def test_identity_inputs_compose_to_identity(self):
        elements = all_permutations()
        idx = [perm_rank(s5_identity())] * 4
        comp = s5_identity()
        for i in idx:
            comp = s5_compose(comp, elements[i])
        assert comp == s5_identity()

    def test_composition_matches_fold(self):
        elements = all_permutations()
        recs = gen_state_tracking(4, self._dist(), 30, make_rng(3, "st"))
        for rec in recs:
            comp = elements[rec["skills"][0]]
            for i in rec["skills"][1:]:
                comp = s5_compose(comp, elements[i])
            assert list(comp.mapping) == rec["meta"]["target_tokens"]

    def test_requires_full_group(self):
        with pytest.raises(ValueError):
            gen_state_tracking(2, dist_from_spec({"kind": "uniform", "d": 60}), 1, make_rng(4, "st"))

    def test_hop_mixture(self):
        mixture = {1: 0.25, 2: 0.25, 3: 0.25, 4: 0.25}
        recs = gen_state_tracking(4, self._dist(), 400, make_rng(5, "st"), hop_mixture=mixture)
        seen = {rec["meta"]["k"] for rec in recs}
        assert seen == {1, 2, 3, 4}

    def test_deterministic(self):
        a = gen_state_tracking(3, self._dist(), 10, make_rng(6, "st"))
        b = gen_state_tracking(3, self._dist(), 10, make_rng(6, "st"))
        assert a == b


class TestEvalArithmetic:
    def test_worked_example(self):
        assert eval_arithmetic("23 + 15 * 7 - 42 * 3") == 2

    def test_precedence(self):
        assert eval_arithmetic("2 * 3 + 1 - 4") == 3
        assert eval_arithmetic("1 + 1") == 2

    def test_token_sequence_input(self):
        assert eval_arithmetic([2, "*", 3, "+", 1]) == 7

    def test_matches_python_eval(self):
        rng = make_rng(7, "expr")
        for _ in range(300):
            n_ops = int(rng.integers(1, 7))
            tokens = [int(rng.integers(1, 60))]
            for _ in range(n_ops):
                tokens.append(["+", "-", "*"][rng.integers(0, 3)])
                tokens.append(int(rng.integers(1, 60)))
            expr = " ".join(map(str, tokens))
            assert eval_arithmetic(expr) == python_eval_arithmetic(expr)

    def test_malformed(self):
        for bad in ("", "1 +", "+ 1 2", "1 2", "1 / 2"):
            with pytest.raises(ValueError):
                eval_arithmetic(bad)

    def test_tokenize(self):
        assert tokenize_expression("1 + 20 * 3") == [1, "+", 20, "*", 3]


class TestGenArithmetic:
    def _dist(self, **kw):
        spec = {"kind": "zipf", "d": 50, "alpha": 1.0, "ordering": {"random": 3}}
        spec.update(kw)
        return dist_from_spec(spec)

    def test_labels_match_oracle(self):
        recs = gen_arithmetic(self._dist(), 200, make_rng(8, "ar"))
        for rec in recs:
            expr = rec["meta"]["expression"]
            assert int(rec["answer"]) == python_eval_arithmetic(expr)
            assert rec["meta"]["label"] == f" {rec['answer']}}}"
            assert rec["prompt"] == f"User: Calculate {expr}.\nAssistant:\\boxed{{"

    def test_operand_skill_mapping(self):
        recs = gen_arithmetic(self._dist(), 50, make_rng(9, "ar"))
        for rec in recs:
            operands = [t for t in tokenize_expression(rec["meta"]["expression"]) if isinstance(t, int)]
            assert operands == [s + 1 for s in rec["skills"]]

    def test_uniform_histogram_flat(self):
        dist = dist_from_spec({"kind": "uniform", "d": 50})
        recs = gen_arithmetic(dist, 4000, make_rng(10, "ar"))
        hist = skill_histogram(recs)
        n = 5 * 4000
        for i in range(50):
            assert abs(hist.get(i, 0) / n - 0.02) <= binomial_band(0.02, n)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            gen_arithmetic(self._dist(), 1, make_rng(11, "ar"), operand_range=(1, 10))


class TestMultihopQA:
    def test_graph_shape_and_determinism(self):
        g1 = gen_relation_graph(50, 20, make_rng(12, "g"))
        g2 = gen_relation_graph(50, 20, make_rng(12, "g"))
        assert g1.edges.shape == (50, 20)
        assert g1.edges.size == 1000
        assert np.array_equal(g1.edges, g2.edges)

    def test_no_self_loops_flag(self):
        g = gen_relation_graph(10, 20, make_rng(13, "g"), allow_self_loops=False)
        for e in range(10):
            assert np.all(g.edges[e] != e)

    def test_worked_example_instance(self):
        # teacher of Bob is Carol; instructor of Carol is Alice
        g = gen_relation_graph(3, 2, make_rng(14, "g"))
        alice, bob, carol = 0, 1, 2
        teacher = g.relation_names.index("teacher")
        instructor = g.relation_names.index("instructor")
        edges = g.edges.copy()
        edges[bob, teacher] = carol
        edges[carol, instructor] = alice
        g = type(g)(
            num_entities=3, num_relations=2, edges=edges,
            entity_names=g.entity_names, relation_names=g.relation_names,
        )
        assert g.entity_names[:3] == ["Alice", "Bob", "Carol"]
        assert follow_relations(g, bob, [teacher, instructor]) == alice
        assert g.fact(bob, teacher) == "The teacher of Bob is Carol."
        assert g.fact(carol, instructor) == "The instructor of Carol is Alice."

    def test_question_rendering_and_answers(self):
        g = gen_relation_graph(20, 20, make_rng(15, "g"))
        dist = dist_from_spec({"kind": "zipf", "d": 20, "alpha": 1.0, "ordering": {"random": 1}})
        recs = gen_multihop_qa(g, 3, dist, 100, make_rng(15, "qa"), include_facts=True)
        for rec in recs:
            rels = [g.relation_names[i] for i in rec["skills"]]
            start = g.entity_names[rec["meta"]["start"]]
            assert rec["answer"] == traverse_by_name(g, start, rels)
            inner = start
            for r in rels:
                inner = f"the {r} of {inner}"
            assert rec["prompt"] == f"Who is {inner}?\nAnswer:"
            assert len(rec["meta"]["facts"]) == 3

    def test_single_hop_is_direct_edge(self):
        g = gen_relation_graph(8, 4, make_rng(16, "g"))
        dist = dist_from_spec({"kind": "uniform", "d": 4})
        recs = gen_multihop_qa(g, 1, dist, 30, make_rng(16, "qa"))
        for rec in recs:
            target = g.edges[rec["meta"]["start"], rec["skills"][0]]
            assert rec["answer"] == g.entity_names[target]

    def test_fact_mixture(self):
        g = gen_relation_graph(8, 4, make_rng(17, "g"))
        dist = dist_from_spec({"kind": "uniform", "d": 4})
        recs = gen_multihop_qa(g, 2, dist, 300, make_rng(17, "qa"), fact_ratio=0.5)
        kinds = {rec["task"] for rec in recs}
        assert kinds == {"qa_fact", "multihop_qa"}
        for rec in recs:
            if rec["task"] == "qa_fact":
                target = g.edges[rec["meta"]["start"], rec["skills"][0]]
                assert rec["answer"] == g.entity_names[target]

    def test_invalid_args(self):
        g = gen_relation_graph(5, 3, make_rng(18, "g"))
        dist = dist_from_spec({"kind": "uniform", "d": 3})
        with pytest.raises(ValueError):
            gen_multihop_qa(g, 0, dist, 1, make_rng(18, "qa"))
        with pytest.raises(ValueError):
            gen_multihop_qa(g, 2, dist_from_spec({"kind": "uniform", "d": 5}), 1, make_rng(18, "qa"))
        with pytest.raises(ValueError):
            gen_relation_graph(1, 3, make_rng(18, "g"))


class TestGsm:
    def _mod_dist(self):
        return dist_from_spec({"kind": "zipf", "d": 211, "alpha": 1.0, "ordering": {"random": 2}})

    def _plain_dist(self):
        return dist_from_spec({"kind": "zipf", "d": 200, "alpha": 1.0, "ordering": {"random": 2}})

    def test_tiny_dag_values(self):
        nodes = [["leaf", 3], ["leaf", 4], ["+", 0, 1, 7, 0]]
        assert eval_dag(nodes, 2, modulus=211) == 7
        wrap = [["leaf", 200], ["leaf", 20], ["+", 0, 1, 9, 1]]
        assert eval_dag(wrap, 2, modulus=211) == 9

    def test_modular_records_valid(self):
        recs = gen_gsm(self._mod_dist(), 100, make_rng(19, "g"), modulus=211)
        for rec in recs:
            nodes = rec["meta"]["nodes"]
            ops = [n for n in nodes if n[0] != "leaf"]
            assert 2 <= len(ops) <= 8
            assert len(ops) == rec["meta"]["num_ops"]
            for i, n in enumerate(nodes):
                if n[0] == "leaf":
                    assert 0 <= n[1] < 211
                else:
                    assert n[0] in GSM_OPS
                    assert n[1] < i and n[2] < i  # acyclic by construction
                    assert 0 <= n[3] < 211
            assert int(rec["answer"]) == eval_dag_recursive(nodes, rec["meta"]["query"], 211)
            assert rec["meta"]["solution"].endswith(f"Answer: #### {rec['answer']}")

    def test_plain_records_valid(self):
        recs = gen_gsm(self._plain_dist(), 100, make_rng(20, "g"), modulus=None)
        for rec in recs:
            nodes = rec["meta"]["nodes"]
            for i, n in enumerate(nodes):
                if n[0] == "leaf":
                    assert 1 <= n[1] <= 200
                else:
                    assert 0 <= n[3] <= 1000
                    if n[0] == "/":
                        va = eval_dag_recursive(nodes, n[1])
                        vb = eval_dag_recursive(nodes, n[2])
                        assert vb != 0 and va % vb == 0
            assert int(rec["answer"]) == eval_dag_recursive(nodes, rec["meta"]["query"])

    def test_fixed_op_count(self):
        recs = gen_gsm(self._mod_dist(), 20, make_rng(21, "g"), num_ops=5, modulus=211)
        assert all(rec["meta"]["num_ops"] == 5 for rec in recs)

    def test_multi_hop_template_still_correct(self):
        recs = gen_gsm(
            self._mod_dist(), 40, make_rng(22, "g"), modulus=211, multi_hop_template=True
        )
        for rec in recs:
            assert rec["meta"]["solution"].endswith(f"Answer: #### {rec['answer']}")
            assert int(rec["answer"]) == eval_dag_recursive(
                rec["meta"]["nodes"], rec["meta"]["query"], 211
            )

    def test_deterministic(self):
        a = gen_gsm(self._mod_dist(), 10, make_rng(23, "g"), modulus=211)
        b = gen_gsm(self._mod_dist(), 10, make_rng(23, "g"), modulus=211)
        assert a == b

    def test_validation(self):
        with pytest.raises(ValueError):
            gen_gsm(self._mod_dist(), 1, make_rng(24, "g"), num_ops=1, modulus=211)
        with pytest.raises(ValueError):
            gen_gsm(self._mod_dist(), 1, make_rng(24, "g"), num_ops=(2, 9), modulus=211)
        with pytest.raises(ValueError):
            gen_gsm(self._mod_dist(), 1, make_rng(24, "g"), modulus=210)  # composite
        with pytest.raises(ValueError):
            gen_gsm(self._plain_dist(), 1, make_rng(24, "g"), modulus=211)  # d mismatch

    def test_rejection_budget_error(self):
        with pytest.raises(GsmGenerationError) as err:
            gen_gsm(self._plain_dist(), 1, make_rng(25, "g"), modulus=None, max_rejects=0)
        assert err.value.modulus is None


class TestRecordIO:
    def test_round_trip_and_manifest(self, tmp_path):
        dist = dist_from_spec({"kind": "uniform", "d": 4})
        g = gen_relation_graph(6, 4, make_rng(26, "g"))
        recs = gen_multihop_qa(g, 2, dist, 25, make_rng(26, "qa"))
        path = tmp_path / "qa.jsonl"
        manifest = write_dataset(recs, path, config={"task": "multihop_qa"}, seed=26)
        assert manifest["num_records"] == 25
        assert read_jsonl(path) == json.loads(json.dumps(recs))  # JSON-stable
        hist = skill_histogram(recs)
        assert manifest["skill_histogram"] == {str(k): v for k, v in hist.items()}
        assert sum(hist.values()) == 2 * 25

    def test_byte_identical_rewrite(self, tmp_path):
        dist = dist_from_spec({"kind": "zipf", "d": 120, "alpha": 1.0})
        recs = gen_state_tracking(2, dist, 15, make_rng(27, "st"))
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        h1 = write_jsonl(recs, p1)
        h2 = write_jsonl(recs, p2)
        assert h1 == h2 and p1.read_bytes() == p2.read_bytes()

    def test_missing_field_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_jsonl([{"task": "x", "prompt": "y"}], tmp_path / "bad.jsonl")


class TestWordlists:
    def test_capacity_and_uniqueness(self):
        assert len(set(ENTITY_NAMES)) == len(ENTITY_NAMES) >= 120
        assert len(set(RELATION_NAMES)) == len(RELATION_NAMES) >= 20
