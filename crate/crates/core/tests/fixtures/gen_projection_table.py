"""Writes projection_truth_table.tsv, the golden table for signature projection.

Each row lists a signature X/Y, an environment, a policy and the projected
category. Rules, written out by hand:
  no operator           -> X
  negation              -> Y
  modal/question/cond.  -> Y under the uniform policy, o under negation-only
"""
import itertools
import pathlib

CATS = ["-", "o", "+"]
ENVS = ["None", "Negation", "Modal", "Question", "Conditional"]
POLICIES = ["uniform", "negation-only"]


def projected(x, y, env, policy):
    if env == "None":
        return x
    if env == "Negation":
        return y
    return y if policy == "uniform" else "o"


rows = ["signature\tenvironment\tpolicy\tcategory"]
for (x, y), env, policy in itertools.product(itertools.product(CATS, CATS), ENVS, POLICIES):
    rows.append(f"{x}/{y}\t{env}\t{policy}\t{projected(x, y, env, policy)}")

out = pathlib.Path(__file__).with_name("projection_truth_table.tsv")
out.write_text("\n".join(rows) + "\n")
print(f"{len(rows) - 1} rows -> {out.name}")
