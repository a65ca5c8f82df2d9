"""Sequential yes/no decoding: test plans, Born-rule chains, POVM, exact oracle.

The receiver interleaves two kinds of binary projective measurements: tests
{P_l, 1-P_l} against candidate product outputs, and typicality checks
{P, 1-P} against the typical subspace.  The chain opens with a typicality
check and, after every "no", projects back onto the typical subspace; a
failed typicality check aborts, a "yes" on a test decodes that codeword.

All states are tracked in the product eigenbasis of the average output,
restricted to the typical subspace: once the opening typicality check has
passed, the state stays inside the typical subspace up to the components a
"no" projection pushes outside it, and those are exactly what the following
typicality check removes.  A test's yes-probability on a masked state only
involves the masked components of the test vector, so the whole chain runs
on dim(H)-sized vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .budgets import DEFAULT_BUDGETS, Budgets
from .channel import CQChannel
from .codebook import Codebook
from .errors import ResourceBudgetError, ValidationError
from .typicality import (
    MaskedHermitian,
    TypicalModel,
    TypicalityParams,
    build_rho_tilde,
    build_typical_model,
    classical_typical_set,
    conditional_typical_outputs,
)

DECODED = "decoded"
ABORT_ATYPICAL = "abort_atypical"
ABORT_EXHAUSTED = "abort_exhausted"

RANK_ONE = "rank_one"
SUBSPACE = "subspace"

_NORM_FLOOR = 1e-14


def full_product_coords(ch: CQChannel, j_seq, labels) -> np.ndarray:
    """Product eigenvector |labels>_{j_seq} in the average-state product eigenbasis."""
    vec = None
    for j, k in zip(j_seq, labels):
        col = ch.coords[int(j)][:, int(k)]
        vec = col if vec is None else np.kron(vec, col)
    return vec


def masked_product_coords(model: TypicalModel, ch: CQChannel, j_seq, labels) -> np.ndarray:
    """Masked-basis components of the product eigenvector |labels>_{j_seq}."""
    out = np.ones(model.dim_H, dtype=complex)
    for i in range(model.n):
        u = ch.coords[int(j_seq[i])]
        out *= u[model.masked_digits[:, i].astype(int), int(labels[i])]
    return out


def product_output_state(ch: CQChannel, j_seq) -> np.ndarray:
    """Exact channel output rho_{j_seq} in the average-state product eigenbasis."""
    state = None
    for j in j_seq:
        u = ch.coords[int(j)]
        lam = np.zeros(ch.letter_dim)
        lam[: ch.letters[int(j)].support] = ch.letters[int(j)].probs
        r = (u * lam) @ u.conj().T
        state = r if state is None else np.kron(state, r)
    return state


@dataclass(frozen=True)
class PlanTest:
    message: int
    codeword: tuple[int, ...]
    labels: tuple[int, ...] | None  # None for a subspace test
    weight: float


@dataclass(frozen=True, eq=False)
class DecoderPlan:
    channel: CQChannel
    model: TypicalModel
    codebook: Codebook
    variant: str
    ordering: str
    worst_index: int | None
    cond_delta: float
    tests: tuple[PlanTest, ...]
    masked_tests: np.ndarray | None  # (M, dim_H) for rank-1 tests
    masked_blocks: tuple[np.ndarray, ...] | None  # (dim_H, r) per subspace test
    m_theory_log2: float

    @property
    def num_tests(self) -> int:
        return len(self.tests)

    @property
    def m_theory(self) -> float:
        """2^(nR) * 2^(n * mean letter entropy): the analytic test-count estimate."""
        return 2.0**self.m_theory_log2

    def test_yes_amplitudes(self, psi: np.ndarray, index: int) -> np.ndarray:
        """Amplitudes <component|psi> for the rank-1 vector or subspace basis of a test."""
        if self.variant == RANK_ONE:
            return np.array([np.vdot(self.masked_tests[index], psi)])
        block = self.masked_blocks[index]
        return block.conj().T @ psi

    def apply_no(self, psi: np.ndarray, index: int, amps: np.ndarray) -> np.ndarray:
        """Masked components after (1 - P_test) acting on a masked state."""
        if self.variant == RANK_ONE:
            return psi - amps[0] * self.masked_tests[index]
        return psi - self.masked_blocks[index] @ amps


def subspace_variant_projectors(
    ch: CQChannel,
    codebook: Codebook,
    delta_cond: float,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> list[np.ndarray]:
    """Per codeword, an orthonormal basis of its conditional typical subspace.

    The basis columns are the conditional-typical product eigenvectors
    themselves (for a fixed codeword they are exactly orthonormal); the
    subspace projector is basis @ basis^dagger.  Expressed in the
    average-state product eigenbasis.
    """
    dim = ch.letter_dim**codebook.n
    if dim > budgets.dim_limit:
        raise ResourceBudgetError(
            f"composite dimension {dim} exceeds dim budget {budgets.dim_limit}", reason="dim"
        )
    cache: dict[tuple[int, ...], np.ndarray] = {}
    out = []
    for word in codebook.codewords:
        if word not in cache:
            cts = conditional_typical_outputs(ch, word, delta_cond, budgets)
            if dim * max(cts.count, 1) > budgets.work_limit:
                raise ResourceBudgetError(
                    f"subspace basis of {dim}x{cts.count} exceeds work budget", reason="work"
                )
            cols = np.empty((dim, cts.count), dtype=complex)
            for i in range(cts.count):
                cols[:, i] = full_product_coords(ch, word, cts.labels[i])
            cache[word] = cols
        out.append(cache[word])
    return out


def build_plan(
    codebook: Codebook,
    ch: CQChannel,
    params: TypicalityParams,
    ordering: str = "lexicographic",
    variant: str = RANK_ONE,
    worst_index: int | None = None,
    model: TypicalModel | None = None,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> DecoderPlan:
    """Ordered test schedule over the codebook's conditional typical outputs.

    ``lexicographic`` runs messages in order, each message's label sequences in
    lexicographic order.  ``worst_case`` moves every test of ``worst_index`` to
    the end of the schedule, realizing the ordering the error bound assumes.
    """
    if variant not in (RANK_ONE, SUBSPACE):
        raise ValidationError(f"unknown variant '{variant}'")
    if ordering not in ("lexicographic", "worst_case"):
        raise ValidationError(f"unknown ordering '{ordering}'")
    if ordering == "worst_case":
        if worst_index is None or not 0 <= worst_index < codebook.num_messages:
            raise ValidationError("worst_case ordering needs a valid worst_index")
    if codebook.n != params.n:
        raise ValidationError(f"codebook n={codebook.n} but params n={params.n}")
    if model is None:
        model = build_typical_model(ch, params, budgets)

    log_priors = np.log(ch.priors)
    tests: list[PlanTest] = []
    cts_cache: dict[tuple[int, ...], object] = {}
    for s, word in enumerate(codebook.codewords):
        if word not in cts_cache:
            cts_cache[word] = conditional_typical_outputs(ch, word, params.cond_delta, budgets)
        cts = cts_cache[word]
        p_seq = math.exp(float(log_priors[np.asarray(word, dtype=int)].sum()))
        if variant == RANK_ONE:
            for i in range(cts.count):
                tests.append(
                    PlanTest(
                        message=s,
                        codeword=word,
                        labels=tuple(int(x) for x in cts.labels[i]),
                        weight=p_seq * float(cts.probs[i]),
                    )
                )
                if len(tests) > budgets.set_limit:
                    raise ResourceBudgetError(
                        f"plan exceeds set budget {budgets.set_limit} tests", reason="set"
                    )
        else:
            tests.append(
                PlanTest(message=s, codeword=word, labels=None, weight=p_seq * cts.total_prob)
            )

    if ordering == "worst_case":
        first = [t for t in tests if t.message != worst_index]
        last = [t for t in tests if t.message == worst_index]
        tests = first + last

    dim_h = model.dim_H
    masked_tests = None
    masked_blocks = None
    if variant == RANK_ONE:
        if len(tests) * max(dim_h, 1) > budgets.work_limit:
            raise ResourceBudgetError(
                f"masked test matrix {len(tests)}x{dim_h} exceeds work budget", reason="work"
            )
        masked_tests = np.empty((len(tests), dim_h), dtype=complex)
        for i, t in enumerate(tests):
            masked_tests[i] = masked_product_coords(model, ch, t.codeword, t.labels)
    else:
        mb = []
        for t in tests:
            cts = cts_cache[t.codeword]
            block = np.empty((dim_h, cts.count), dtype=complex)
            for i in range(cts.count):
                block[:, i] = masked_product_coords(model, ch, t.codeword, cts.labels[i])
            mb.append(block)
        masked_blocks = tuple(mb)

    m_theory_log2 = codebook.n * (codebook.rate + ch.mean_letter_entropy)
    return DecoderPlan(
        channel=ch,
        model=model,
        codebook=codebook,
        variant=variant,
        ordering=ordering,
        worst_index=worst_index,
        cond_delta=params.cond_delta,
        tests=tuple(tests),
        masked_tests=masked_tests,
        masked_blocks=masked_blocks,
        m_theory_log2=m_theory_log2,
    )


@dataclass(frozen=True)
class Transcript:
    """One decoding attempt: every binary outcome plus the final verdict."""

    outcome: str
    decoded: int | None
    labels: tuple[int, ...]
    events: tuple[tuple[str, int, bool], ...]
    tests_run: int


def sample_output_labels(ch: CQChannel, j_seq, rng: np.random.Generator) -> tuple[int, ...]:
    """Draw eigenlabels from the full conditional spectral distribution.

    The physical channel knows nothing about typicality: atypical label
    sequences are drawn with their true probability and simply tend to abort
    at the first typicality check.
    """
    labels = []
    for j in j_seq:
        probs = ch.letters[int(j)].probs
        labels.append(int(rng.choice(probs.size, p=probs)))
    return tuple(labels)


def simulate_trial(
    plan: DecoderPlan,
    ch: CQChannel,
    true_index: int,
    params: TypicalityParams | None = None,
    rng: np.random.Generator | None = None,
) -> Transcript:
    """Run one Born-rule measurement chain for a uniformly chosen message.

    The channel output eigenlabels are sampled exactly from the per-letter
    spectral weights; every measurement renormalizes the post-measurement
    state, treating branches of squared norm below 1e-14 as impossible.
    """
    if rng is None:
        rng = np.random.default_rng()
    if params is not None and params.n != plan.model.n:
        raise ValidationError("params.n does not match the plan")
    word = plan.codebook.codewords[true_index]
    labels = sample_output_labels(ch, word, rng)
    psi = masked_product_coords(plan.model, ch, word, labels)

    events: list[tuple[str, int, bool]] = []
    p_typ = float(np.vdot(psi, psi).real)
    passed = p_typ >= _NORM_FLOOR and rng.random() < p_typ
    events.append(("typ", -1, passed))
    if not passed:
        return Transcript(ABORT_ATYPICAL, None, labels, tuple(events), 0)
    psi = psi / math.sqrt(p_typ)

    for idx in range(plan.num_tests):
        amps = plan.test_yes_amplitudes(psi, idx)
        p_yes = float(np.vdot(amps, amps).real)
        if p_yes > 1.0:
            p_yes = 1.0
        yes = p_yes >= _NORM_FLOOR and rng.random() < p_yes
        events.append(("test", idx, yes))
        if yes:
            return Transcript(DECODED, plan.tests[idx].message, labels, tuple(events), idx + 1)
        p_no = 1.0 - p_yes
        if p_no < _NORM_FLOOR:
            # the no-branch is impossible; the yes draw above cannot have
            # failed except by floor clipping, so force the decode
            events[-1] = ("test", idx, True)
            return Transcript(DECODED, plan.tests[idx].message, labels, tuple(events), idx + 1)
        psi = plan.apply_no(psi, idx, amps) / math.sqrt(p_no)
        p_typ = float(np.vdot(psi, psi).real)
        if p_typ > 1.0:
            p_typ = 1.0
        passed = p_typ >= _NORM_FLOOR and rng.random() < p_typ
        events.append(("typ", idx, passed))
        if not passed:
            return Transcript(ABORT_ATYPICAL, None, labels, tuple(events), idx + 1)
        psi = psi / math.sqrt(p_typ)

    return Transcript(ABORT_EXHAUSTED, None, labels, tuple(events), plan.num_tests)


def transcript_probability(
    plan: DecoderPlan, ch: CQChannel, j_seq, labels, test_index: int
) -> float:
    """Exact probability of the transcript "no everywhere, yes at test_index".

    Walks the same Born-rule chain as simulate_trial with forced outcomes
    (all typicality checks pass, every earlier test answers no), multiplying
    the branch probabilities.
    """
    if not 0 <= test_index < plan.num_tests:
        raise ValidationError(f"test_index {test_index} out of range")
    psi = masked_product_coords(plan.model, ch, j_seq, labels)
    total = float(np.vdot(psi, psi).real)
    if total < _NORM_FLOOR:
        return 0.0
    psi = psi / math.sqrt(total)
    for idx in range(test_index):
        amps = plan.test_yes_amplitudes(psi, idx)
        p_yes = min(float(np.vdot(amps, amps).real), 1.0)
        p_no = 1.0 - p_yes
        if p_no < _NORM_FLOOR:
            return 0.0
        total *= p_no
        psi = plan.apply_no(psi, idx, amps) / math.sqrt(p_no)
        p_typ = min(float(np.vdot(psi, psi).real), 1.0)
        if p_typ < _NORM_FLOOR:
            return 0.0
        total *= p_typ
        psi = psi / math.sqrt(p_typ)
    amps = plan.test_yes_amplitudes(psi, test_index)
    return total * float(np.vdot(amps, amps).real)


def amplitude_chain(plan: DecoderPlan, ch: CQChannel, j_seq, labels, m: int) -> complex:
    """<state| P (1-P_m) P ... P (1-P_1) P |state> for the plan's first m tests.

    This is the surviving amplitude after m "no" answers with every
    typicality projection applied, evaluated without any renormalization.
    """
    if m < 0 or m > plan.num_tests:
        raise ValidationError(f"m must be in [0, {plan.num_tests}]")
    bra = masked_product_coords(plan.model, ch, j_seq, labels)
    psi = bra.copy()
    for idx in range(m):
        amps = plan.test_yes_amplitudes(psi, idx)
        psi = plan.apply_no(psi, idx, amps)
    return complex(np.vdot(bra, psi))


@dataclass(frozen=True)
class AvgAmplitude:
    """Two independent evaluations of the codebook-averaged chain amplitude."""

    power: float
    binomial: float | None


def average_amplitude(
    rho_tilde: MaskedHermitian,
    model: TypicalModel,
    m: int,
    binomial_cap: int = 64,
) -> AvgAmplitude:
    """Tr[(P - rho_tilde)^m rho_tilde], plus its alternating-binomial expansion.

    The power form multiplies matrices in the masked basis m times.  The
    binomial form sum_k C(m,k) (-1)^k Tr[rho_tilde^(k+1)] is evaluated with
    compensated summation and only up to ``binomial_cap`` (alternating
    binomial sums lose precision beyond that); past the cap it is None.
    """
    if m < 0:
        raise ValidationError("m must be >= 0")
    power = float(average_amplitude_powers(rho_tilde, model, m)[m])
    binomial = None
    if m <= binomial_cap:
        lam = rho_tilde.eigenvalues()
        if lam.size == 0:
            binomial = 0.0
        else:
            traces = [float(np.sum(lam ** (k + 1))) for k in range(m + 1)]
            terms = [
                (-1.0) ** k * math.comb(m, k) * traces[k]
                for k in range(m + 1)
            ]
            binomial = math.fsum(terms)
    return AvgAmplitude(power=power, binomial=binomial)


def average_amplitude_powers(
    rho_tilde: MaskedHermitian, model: TypicalModel, m_max: int
) -> np.ndarray:
    """Power-form average amplitudes for every m in 0..m_max, incrementally."""
    if m_max < 0:
        raise ValidationError("m_max must be >= 0")
    out = np.empty(m_max + 1)
    if rho_tilde.dim == 0:
        out[:] = 0.0
        return out
    if rho_tilde.is_diagonal:
        lam = rho_tilde.diag
        running = lam.astype(float).copy()
        out[0] = running.sum()
        for m in range(1, m_max + 1):
            running = running * (1.0 - lam)
            out[m] = running.sum()
        return out
    dense = rho_tilde.dense
    x = np.eye(dense.shape[0], dtype=complex) - dense
    running = dense.copy()
    out[0] = float(np.trace(running).real)
    for m in range(1, m_max + 1):
        running = x @ running
        out[m] = float(np.trace(running).real)
    return out


def verify_mixture_identity(
    ch: CQChannel, params: TypicalityParams, budgets: Budgets = DEFAULT_BUDGETS
) -> float:
    """Max-abs deviation between sum_l pi_l P P_l P and rho_tilde.

    The left side is rebuilt test by test from dense kron expansions of the
    individual product eigenvectors over every (typical sequence, conditional
    label) pair; the right side comes from build_rho_tilde's batched path.
    """
    model = build_typical_model(ch, params, budgets)
    rho_tilde = build_rho_tilde(ch, params, model, budgets)
    dim = model.dim_total
    if dim * dim > budgets.work_limit:
        raise ResourceBudgetError(
            f"dense {dim}x{dim} accumulation exceeds work budget", reason="work"
        )
    tset = classical_typical_set(ch.priors, params.n, params.source_delta, budgets)
    log_priors = np.log(ch.priors)
    lhs = np.zeros((dim, dim), dtype=complex)
    mask = model.mask
    pairs = 0
    for row in tset.sequences:
        cts = conditional_typical_outputs(ch, row, params.cond_delta, budgets)
        pairs += cts.count
        if pairs > budgets.set_limit:
            raise ResourceBudgetError(
                f"mixture identity needs more than {budgets.set_limit} pairs", reason="set"
            )
        p_seq = math.exp(float(log_priors[row.astype(int)].sum()))
        for i in range(cts.count):
            vec = full_product_coords(ch, row, cts.labels[i])
            masked_vec = np.where(mask, vec, 0.0)
            lhs += (p_seq * float(cts.probs[i])) * np.outer(masked_vec, masked_vec.conj())
    ix = model.masked_indices
    lhs_masked = lhs[np.ix_(ix, ix)]
    if model.dim_H == 0:
        return float(np.abs(lhs).max()) if lhs.size else 0.0
    return float(np.abs(lhs_masked - rho_tilde.as_dense()).max())


def transcript_to_text(tr: Transcript) -> str:
    """Structured plain-text form of one decoding attempt."""
    lines = [
        f"outcome = {tr.outcome}",
        f"decoded = {'' if tr.decoded is None else tr.decoded}",
        f"labels = {list(tr.labels)}",
        f"tests_run = {tr.tests_run}",
        "events = " + " ".join(
            f"{kind}:{index}:{'yes' if yes else 'no'}" for kind, index, yes in tr.events
        ),
    ]
    return "\n".join(lines) + "\n"


def error_report_to_text(report: "ErrorReport") -> str:
    lines = [
        f"num_messages = {report.num_messages}",
        f"p_err = {report.p_err!r}",
        f"abort_mass = {report.abort_mass!r}",
        f"misdecode_mass = {report.misdecode_mass!r}",
        f"per_message_success = {[float(x) for x in report.per_message_success]}",
        f"per_message_abort = {[float(x) for x in report.per_message_abort]}",
        f"per_message_misdecode = {[float(x) for x in report.per_message_misdecode]}",
    ]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class POVMSet:
    """Effective POVM of the whole decoding chain.

    Rank-1 plans store each element as a vector v with E = outer(v, v*);
    subspace plans store a block W with E = W @ W^dagger.  The abort element
    is dense.  Everything is in the average-state product eigenbasis.
    """

    plan: DecoderPlan
    vectors: tuple[np.ndarray, ...] | None
    blocks: tuple[np.ndarray, ...] | None
    abort: np.ndarray
    test_messages: tuple[int, ...]

    @property
    def num_elements(self) -> int:
        return len(self.test_messages)

    @property
    def dim(self) -> int:
        return self.abort.shape[0]

    def element(self, index: int) -> np.ndarray:
        if self.vectors is not None:
            v = self.vectors[index]
            return np.outer(v, v.conj())
        w = self.blocks[index]
        return w @ w.conj().T

    def completeness_defect(self) -> float:
        total = self.abort.astype(complex).copy()
        for i in range(self.num_elements):
            total += self.element(i)
        return float(np.abs(total - np.eye(self.dim)).max())

    def min_element_eigenvalue(self) -> float:
        """Smallest eigenvalue over all elements including the abort element."""
        worst = float(np.linalg.eigvalsh(self.abort).min())
        for i in range(self.num_elements):
            worst = min(worst, float(np.linalg.eigvalsh(self.element(i)).min()))
        return worst


def build_povm(
    plan: DecoderPlan, model: TypicalModel | None = None, budgets: Budgets = DEFAULT_BUDGETS
) -> POVMSet:
    """Materialize the chain's POVM elements by accumulating the no-chain operator.

    With C_1 = P and C_(l+1) = P (1 - P_l) C_l, element l is C_l^dagger P_l C_l,
    so the whole set costs O(M) dense updates.  The abort element is
    identity - sum of the rest, then symmetrized.
    """
    model = model or plan.model
    ch = plan.channel
    dim = model.dim_total
    if dim > budgets.dim_limit:
        raise ResourceBudgetError(
            f"composite dimension {dim} exceeds dim budget {budgets.dim_limit}", reason="dim"
        )
    if dim * dim > budgets.work_limit:
        raise ResourceBudgetError(
            f"dense {dim}x{dim} POVM accumulation exceeds work budget", reason="work"
        )
    mask = model.mask
    chain = np.zeros((dim, dim), dtype=complex)
    chain[mask, mask] = 1.0  # C_1 = P
    total = np.zeros((dim, dim), dtype=complex)
    vectors: list[np.ndarray] = []
    blocks: list[np.ndarray] = []
    basis_cache: dict[tuple[int, ...], np.ndarray] = {}
    for t in plan.tests:
        if plan.variant == RANK_ONE:
            phi = full_product_coords(ch, t.codeword, t.labels)
            v = chain.conj().T @ phi
            vectors.append(v)
            total += np.outer(v, v.conj())
            chain -= np.outer(phi, phi.conj() @ chain)
        else:
            if t.codeword not in basis_cache:
                basis_cache[t.codeword] = _subspace_basis(ch, t.codeword, plan.cond_delta, budgets)
            q = basis_cache[t.codeword]
            w = chain.conj().T @ q
            blocks.append(w)
            total += w @ w.conj().T
            chain -= q @ (q.conj().T @ chain)
        chain[~mask, :] = 0.0
    abort = np.eye(dim, dtype=complex) - total
    abort = 0.5 * (abort + abort.conj().T)
    return POVMSet(
        plan=plan,
        vectors=tuple(vectors) if plan.variant == RANK_ONE else None,
        blocks=tuple(blocks) if plan.variant == SUBSPACE else None,
        abort=abort,
        test_messages=tuple(t.message for t in plan.tests),
    )


def _subspace_basis(ch, codeword, cond_delta, budgets) -> np.ndarray:
    cts = conditional_typical_outputs(ch, codeword, cond_delta, budgets)
    dim = ch.letter_dim ** len(codeword)
    cols = np.empty((dim, cts.count), dtype=complex)
    for i in range(cts.count):
        cols[:, i] = full_product_coords(ch, codeword, cts.labels[i])
    return cols


@dataclass(frozen=True, eq=False)
class ErrorReport:
    """Exact per-message decode/abort/misdecode masses and their averages."""

    num_messages: int
    p_err: float
    abort_mass: float
    misdecode_mass: float
    per_message_success: np.ndarray
    per_message_abort: np.ndarray
    per_message_misdecode: np.ndarray


def exact_error_probability(povm: POVMSet, ch: CQChannel, codebook: Codebook) -> ErrorReport:
    """Average error probability of the full POVM on the exact product outputs."""
    if povm.plan.codebook != codebook:
        raise ValidationError("POVM was built for a different codebook")
    n_msg = codebook.num_messages
    messages = np.array(povm.test_messages, dtype=int)
    success = np.zeros(n_msg)
    misdecode = np.zeros(n_msg)
    abort = np.zeros(n_msg)
    if povm.vectors is not None:
        basis = np.stack(povm.vectors) if povm.num_elements else np.zeros((0, povm.dim), complex)
    else:
        basis = (
            np.concatenate(povm.blocks, axis=1).T.copy()
            if povm.num_elements
            else np.zeros((0, povm.dim), complex)
        )
        col_owner = np.concatenate(
            [np.full(b.shape[1], m) for b, m in zip(povm.blocks, messages)]
        ) if povm.num_elements else np.zeros(0, dtype=int)
    for s in range(n_msg):
        rho = product_output_state(ch, codebook.codewords[s])
        if basis.shape[0]:
            vals = np.einsum("ij,jk,ik->i", basis.conj(), rho, basis).real
        else:
            vals = np.zeros(0)
        if povm.vectors is not None:
            per_test = vals
            owner = messages
        else:
            per_test = vals
            owner = col_owner
        mine = float(per_test[owner == s].sum()) if per_test.size else 0.0
        everything = float(per_test.sum()) if per_test.size else 0.0
        success[s] = mine
        misdecode[s] = everything - mine
        abort[s] = 1.0 - everything
    return ErrorReport(
        num_messages=n_msg,
        p_err=float(1.0 - success.mean()),
        abort_mass=float(abort.mean()),
        misdecode_mass=float(misdecode.mean()),
        per_message_success=success,
        per_message_abort=abort,
        per_message_misdecode=misdecode,
    )
