import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as nph

from bellsim.core import (
    CANONICAL_CONTEXTS,
    Context,
    ContextDataset,
    CounterfactualRow,
    CounterfactualTable,
    ExperimentBundle,
    b_statistic,
    correlation,
    project_bundle,
    project_context,
    row_c_value,
    row_c_values,
    s_statistic,
)
from bellsim.errors import DomainError


def tables(max_rows=200):
    return st.integers(min_value=1, max_value=max_rows).flatmap(
        lambda n: nph.arrays(np.int8, (n, 4), elements=st.sampled_from([-1, 1]))
    ).map(CounterfactualTable)


def bundles(max_pairs=64):
    def build(sizes_and_bits):
        datasets = []
        for context, pairs in zip(CANONICAL_CONTEXTS, sizes_and_bits):
            datasets.append(ContextDataset(context, pairs))
        return ExperimentBundle(tuple(datasets))

    one = st.integers(min_value=1, max_value=max_pairs).flatmap(
        lambda n: nph.arrays(np.int8, (n, 2), elements=st.sampled_from([-1, 1]))
    )
    return st.tuples(one, one, one, one).map(build)


class TestRowC:
    def test_exhaustive_sixteen_rows(self):
        for a1, a2, b1, b2 in itertools.product((1, -1), repeat=4):
            assert row_c_value(CounterfactualRow(a1, a2, b1, b2)) in (-2, 2)

    def test_examples(self):
        assert row_c_value(CounterfactualRow(1, 1, 1, 1)) == 2
        assert row_c_value(CounterfactualRow(1, -1, 1, -1)) == -2
        # global sign flip leaves all products unchanged
        assert row_c_value(CounterfactualRow(-1, -1, -1, -1)) == 2

    def test_vectorized_matches_scalar(self):
        rows = list(itertools.product((1, -1), repeat=4))
        table = CounterfactualTable.from_rows(rows)
        expected = [row_c_value(CounterfactualRow(*r)) for r in rows]
        assert row_c_values(table).tolist() == expected


class TestBStatistic:
    def test_all_identical_rows(self):
        table = CounterfactualTable.from_rows([(1, 1, 1, 1)] * 7)
        assert b_statistic(table) == 2.0

    def test_two_row_cancellation(self):
        # hand evaluation: C = +2 and C = -2
        table = CounterfactualTable.from_rows([(1, 1, 1, 1), (1, -1, 1, -1)])
        assert b_statistic(table) == 0.0

    def test_uniform_random_table_in_range(self):
        rng = np.random.default_rng(2024)
        table = CounterfactualTable(rng.choice([-1, 1], size=(10_000, 4)))
        assert -2.0 <= b_statistic(table) <= 2.0

    def test_empty_table_rejected(self):
        table = CounterfactualTable(np.empty((0, 4), dtype=np.int8))
        with pytest.raises(DomainError, match="N=0"):
            b_statistic(table)

    @settings(max_examples=200)
    @given(tables())
    def test_bound_holds_for_every_table(self, table):
        assert abs(b_statistic(table)) <= 2.0
        assert set(np.unique(row_c_values(table))) <= {-2, 2}

    @given(tables())
    def test_global_sign_flip_invariance(self, table):
        flipped = CounterfactualTable(-table.outcomes)
        assert b_statistic(flipped) == b_statistic(table)


class TestProjection:
    def test_field_selection(self):
        table = CounterfactualTable.from_rows([(1, -1, 1, -1)])
        assert project_context(table, Context(1, 1)).pairs.tolist() == [[1, 1]]
        assert project_context(table, Context(2, 2)).pairs.tolist() == [[-1, -1]]

    def test_projected_correlation_is_column_mean(self):
        rng = np.random.default_rng(5)
        table = CounterfactualTable(rng.choice([-1, 1], size=(500, 4)))
        dataset = project_context(table, Context(1, 1))
        products = table.outcomes[:, 0].astype(int) * table.outcomes[:, 2]
        assert correlation(dataset) == pytest.approx(products.mean(), abs=0)

    def test_empty_table_rejected(self):
        table = CounterfactualTable(np.empty((0, 4), dtype=np.int8))
        with pytest.raises(DomainError):
            project_context(table, Context(1, 1))

    @settings(max_examples=150)
    @given(tables())
    def test_bundle_identity_bridge(self, table):
        # same rows averaged four ways equal the one-table statistic
        assert s_statistic(project_bundle(table)) == pytest.approx(
            b_statistic(table), abs=1e-12
        )


class TestCorrelation:
    def test_examples(self):
        ctx = Context(1, 1)
        assert correlation(ContextDataset(ctx, [[1, 1]] * 4)) == 1.0
        assert correlation(ContextDataset(ctx, [[1, 1], [1, -1]])) == 0.0
        assert correlation(ContextDataset(ctx, [[1, 1], [1, 1], [-1, 1]])) == pytest.approx(1 / 3)

    def test_empty_rejected(self):
        dataset = ContextDataset(Context(1, 2), np.empty((0, 2), dtype=np.int8))
        with pytest.raises(DomainError):
            correlation(dataset)


class TestSStatistic:
    def test_all_perfectly_correlated(self):
        datasets = tuple(ContextDataset(c, [[1, 1]] * 3) for c in CANONICAL_CONTEXTS)
        assert s_statistic(ExperimentBundle(datasets)) == 2.0

    def test_pr_box_data_reaches_four(self):
        # perfect correlation in (1,1), (1,2), (2,1); perfect anticorrelation in (2,2)
        datasets = []
        for context in CANONICAL_CONTEXTS:
            pair = [1, -1] if (context.alice, context.bob) == (2, 2) else [1, 1]
            datasets.append(ContextDataset(context, [pair] * 5))
        assert s_statistic(ExperimentBundle(tuple(datasets))) == 4.0

    @settings(max_examples=150)
    @given(bundles())
    def test_range_and_sign_flip(self, bundle):
        value = s_statistic(bundle)
        assert -4.0 <= value <= 4.0
        flipped = ExperimentBundle(
            tuple(ContextDataset(d.context, -d.pairs) for d in bundle.datasets)
        )
        assert s_statistic(flipped) == value

    def test_empty_dataset_rejected(self):
        datasets = [ContextDataset(c, [[1, 1]]) for c in CANONICAL_CONTEXTS[:3]]
        datasets.append(ContextDataset(Context(2, 2), np.empty((0, 2), dtype=np.int8)))
        with pytest.raises(DomainError):
            s_statistic(ExperimentBundle(tuple(datasets)))


class TestValidation:
    def test_bad_outcome_values(self):
        with pytest.raises(DomainError, match="must be \\+1 or -1"):
            CounterfactualTable([[1, 1, 0, 1]])
        with pytest.raises(DomainError):
            CounterfactualRow(1, 1, 2, 1)
        with pytest.raises(DomainError):
            ContextDataset(Context(1, 1), [[1, 3]])

    def test_non_integer_outcomes(self):
        with pytest.raises(DomainError, match="integers"):
            CounterfactualTable([[1.0, 1.0, 0.5, 1.0]])

    def test_context_settings(self):
        with pytest.raises(DomainError):
            Context(0, 1)
        with pytest.raises(DomainError):
            Context(1, 3)
        assert [c.index for c in CANONICAL_CONTEXTS] == [0, 1, 2, 3]

    def test_bundle_must_cover_contexts(self):
        same = tuple(ContextDataset(Context(1, 1), [[1, 1]]) for _ in range(4))
        with pytest.raises(DomainError, match="cover all four"):
            ExperimentBundle(same)

    def test_bundle_reorders_to_canonical(self):
        datasets = [ContextDataset(c, [[1, 1]]) for c in reversed(CANONICAL_CONTEXTS)]
        bundle = ExperimentBundle(tuple(datasets))
        assert [d.context for d in bundle.datasets] == list(CANONICAL_CONTEXTS)

    def test_outcome_arrays_read_only(self):
        table = CounterfactualTable.from_rows([(1, 1, 1, 1)])
        with pytest.raises(ValueError):
            table.outcomes[0, 0] = -1
