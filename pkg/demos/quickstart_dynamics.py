"""Quickstart: two-block graphs and the two evolution rules.

Samples a small two-community graph, walks one majority update by hand,
then runs full replicates of both model variants and prints their
trajectories.
"""

from majoritysbm import (
    BlockParams,
    ModelVariant,
    RngStream,
    majority_step,
    neighbor_tally,
    run_dynamics,
    sample_sbm,
)


def main():
    params = BlockParams(p=0.5, q=0.3)  # dense within a camp, sparser across
    stream = RngStream.from_seed(7)

    # 8 vertices holding +1 followed by 5 holding -1
    graph, opinions = sample_sbm(8, 5, params, stream)
    print(f"sampled graph: {graph.vertex_count} vertices, {graph.edge_count} edges")
    for v in (0, 9):
        plus, minus = neighbor_tally(graph, opinions, v)
        side = "+" if opinions.values[v] == 1 else "-"
        print(f"  vertex {v} ({side}): {plus} plus-neighbours, {minus} minus-neighbours")

    after = majority_step(graph, opinions)
    print(f"one update: {opinions.plus_count} -> {after.plus_count} plus vertices\n")

    # the full day loop, both variants, same starting split
    for variant in ModelVariant:
        outcome, traj = run_dynamics(
            variant, 8, 5, params, max_rounds=500, stream=RngStream.replicate(2024, 0)
        )
        print(f"{variant.value:14s} outcome: {outcome.kind.value} at day {outcome.day}")
        print(f"{'':14s} plus-count path: {traj.plus_counts.tolist()}")


if __name__ == "__main__":
    main()
