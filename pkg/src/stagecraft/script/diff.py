"""Plot-chain diffing and the bounded-edit rule for reflection proposals.

Diffs are keyed by plot id.  Reordering of surviving plots is deliberately
not a recognized edit: an id whose relative order changed is classified as
a removal plus an insertion, which the reflection bound then rejects.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .model import Plot, PlotChain


class AmbiguousDiffError(ValueError):
    """One of the chains contains duplicate plot ids; the diff is undefined."""


@dataclass(frozen=True)
class ModifiedPlot:
    plot_id: str
    old_description: str
    new_description: str
    # Full replacement keeps apply() exact when fields other than the
    # description (owner) changed too.
    new_plot: Plot = None  # type: ignore[assignment]


@dataclass(frozen=True)
class CompletionChange:
    plot_id: str
    old_completed: bool
    new_completed: bool


@dataclass(frozen=True)
class PlotChainDiff:
    modified: tuple[ModifiedPlot, ...] = ()
    inserted: tuple[tuple[int, Plot], ...] = ()  # (position in the new chain, plot)
    removed: tuple[str, ...] = ()
    completion_changes: tuple[CompletionChange, ...] = ()

    def is_empty(self) -> bool:
        return not (self.modified or self.inserted or self.removed or self.completion_changes)


def _require_unique_ids(chain: PlotChain, label: str) -> None:
    ids = chain.ids()
    if len(ids) != len(set(ids)):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise AmbiguousDiffError(f"duplicate plot ids in {label} chain: {dupes}")


def _common_subsequence(old_ids: list[str], new_ids: list[str]) -> set[str]:
    """Longest common subsequence of the two id lists (ids are unique per
    chain).  Ids outside the LCS are treated as removed/inserted, so an id
    that merely moved shows up as a removal+insertion pair.
    """
    n, m = len(old_ids), len(new_ids)
    lcs = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if old_ids[i] == new_ids[j]:
                lcs[i][j] = lcs[i + 1][j + 1] + 1
            else:
                lcs[i][j] = max(lcs[i + 1][j], lcs[i][j + 1])
    kept: set[str] = set()
    i = j = 0
    while i < n and j < m:
        if old_ids[i] == new_ids[j]:
            kept.add(old_ids[i])
            i += 1
            j += 1
        elif lcs[i + 1][j] >= lcs[i][j + 1]:
            i += 1
        else:
            j += 1
    return kept


def diff_chains(old: PlotChain, new: PlotChain) -> PlotChainDiff:
    """Classify the edits that turn ``old`` into ``new``, keyed by plot id.

    Descriptions are compared verbatim.  ``apply_diff(old, diff) == new``
    holds for every pair of duplicate-free chains.
    """
    _require_unique_ids(old, "old")
    _require_unique_ids(new, "new")

    old_ids = old.ids()
    new_ids = new.ids()
    kept = _common_subsequence(old_ids, new_ids)

    removed = tuple(i for i in old_ids if i not in kept)
    inserted = tuple(
        (pos, plot) for pos, plot in enumerate(new.plots) if plot.id not in kept
    )

    modified = []
    completion_changes = []
    for plot_id in (i for i in new_ids if i in kept):
        before = old.get(plot_id)
        after = new.get(plot_id)
        if before.description != after.description or before.owner != after.owner:
            modified.append(ModifiedPlot(plot_id, before.description, after.description, after))
        if before.completed != after.completed:
            completion_changes.append(CompletionChange(plot_id, before.completed, after.completed))

    return PlotChainDiff(tuple(modified), inserted, removed, tuple(completion_changes))


def apply_diff(old: PlotChain, diff: PlotChainDiff) -> PlotChain:
    """Reconstruct the new chain from the old chain plus a diff."""
    removed = set(diff.removed)
    replacements = {m.plot_id: m.new_plot for m in diff.modified}
    completions = {c.plot_id: c.new_completed for c in diff.completion_changes}

    kept: list[Plot] = []
    for plot in old:
        if plot.id in removed:
            continue
        plot = replacements.get(plot.id, plot)
        if plot.id in completions and plot.completed != completions[plot.id]:
            plot = replace(plot, completed=completions[plot.id])
        kept.append(plot)

    result = kept
    for pos, plot in sorted(diff.inserted, key=lambda t: t[0]):
        result.insert(min(pos, len(result)), plot)
    return PlotChain(tuple(result))


@dataclass(frozen=True)
class BoundViolation:
    code: str  # removed | completed-modified | completion-reverted | budget-exceeded
    plot_id: str | None = None
    detail: str = ""


@dataclass(frozen=True)
class ReflectionOutcome:
    accepted: bool
    chain: PlotChain  # the new chain if accepted, the old chain otherwise
    violations: tuple[BoundViolation, ...] = ()
    diff: PlotChainDiff = field(default_factory=PlotChainDiff)


def enforce_reflection_bound(
    old: PlotChain, new: PlotChain, budget: int = 1
) -> ReflectionOutcome:
    """Accept or reject a reflection proposal against the bounded-edit rule.

    Accept iff all of:
      (a) no completed plot is modified (and, via (b), not removed either);
      (b) no plot is removed -- reordering counts as removal;
      (c) completion flags only move incomplete -> complete;
      (d) |modified incomplete plots| + |inserted plots| <= budget.

    Rejection returns the old chain untouched plus the violation list; it is
    a value, never an exception.
    """
    diff = diff_chains(old, new)
    violations: list[BoundViolation] = []

    for plot_id in diff.removed:
        violations.append(BoundViolation("removed", plot_id, "plots may not be removed or reordered"))

    changes = 0
    for mod in diff.modified:
        if old.get(mod.plot_id).completed:
            violations.append(
                BoundViolation("completed-modified", mod.plot_id, "completed plots are frozen")
            )
        else:
            changes += 1

    for change in diff.completion_changes:
        if change.old_completed and not change.new_completed:
            violations.append(
                BoundViolation("completion-reverted", change.plot_id, "completion is monotone")
            )

    changes += len(diff.inserted)
    if changes > budget:
        violations.append(
            BoundViolation("budget-exceeded", None, f"{changes} changes exceed the budget of {budget}")
        )

    if violations:
        return ReflectionOutcome(False, old, tuple(violations), diff)
    return ReflectionOutcome(True, new, (), diff)
