import os
from collections.abc import Callable

from affine_tac.exceptions import VerdictError
from affine_tac.tac import TacReport


def validate_tac_report(
    report: TacReport,
    euler: int | None,
    logger_func: Callable[[str], None],
) -> None:
    """Checks a τ estimate against bounds every immersion satisfies.

    Args:
        report: The τ estimate.
        euler: Euler characteristic of the manifold, if known.
        logger_func: A function that takes a string and logs it
                     (e.g. logger.warning).

    Raises:
        VerdictError: if the estimate violates a hard bound.
    """
    # A height function on a compact manifold has a maximum and a minimum
    if report.tau_estimate < 2 - 3 * report.stderr:
        raise VerdictError(
            f"The τ estimate of {report.atlas} is {report.tau_estimate:.4f} ± {report.stderr:.4f}, "
            "below the lower bound of 2.",
        )

    low_counts = sorted(k for k in report.histogram if k < 2)
    if low_counts:
        raise VerdictError(
            f"FAIL: {report.atlas} has height functions with fewer than two critical points "
            f"(counts {low_counts}).",
        )

    # Morse counts share the parity of χ(M)
    if euler is not None:
        wrong_parity = sorted(k for k in report.histogram if (k - euler) % 2)
        if wrong_parity:
            raise VerdictError(
                f"FAIL: Counts {wrong_parity} on {report.atlas} differ in parity from χ = {euler}.",
            )

    rejection_warning = float(os.getenv("TAC_VALIDATE_REJECTION_WARNING", 0.01))
    if report.rejection_rate >= rejection_warning:
        logger_func(
            f"WARNING: {report.non_morse_rejections} non-Morse draws rejected on {report.atlas} "
            f"({report.rejection_rate:.1%}).",
        )

    if report.index_sum_violations:
        logger_func(
            f"WARNING: {report.index_sum_violations} accepted draws on {report.atlas} have an "
            f"index sum different from χ = {euler}.",
        )
