"""
LIBSVM files and the command line
=================================

Reads a small LIBSVM file, then drives the ``privlasso`` command through its
Python entry point: train a model, evaluate it, and run an experiment.
"""

# %%
import tempfile
from pathlib import Path

from privlasso import load_libsvm, scale_features
from privlasso.cli import main

toy = Path(__file__).resolve().parent.parent / "tests" / "data" / "toy100.svm"
raw = load_libsvm(toy)
print("samples", raw.n, "features", raw.p, "positives", int(raw.labels.sum()))
print("max |x| before scaling %.1f, after %.1f" % (abs(raw.features).max(), abs(scale_features(raw).features).max()))

# %%
# Equivalent to `privlasso gen-data`, `privlasso train` and
# `privlasso evaluate` in a shell.
work = Path(tempfile.mkdtemp())
main(["gen-data", "--out", str(work / "synth.svm"), "--n", "2000", "--p", "40", "--seed", "1"])
main(["train", "--data", str(work / "synth.svm"), "--out", str(work / "model.txt"),
      "--algorithm", "sparsifier", "--lambda", "5", "--nonprivate-iterations", "3000"])
print((work / "model.txt").read_text())
main(["evaluate", "--model", str(work / "model.txt"), "--data", str(work / "synth.svm"),
      "--support", str(work / "synth.svm.support")])

# %%
# Any LIBSVM file works as experiment input.
main(["experiment", "--data", str(toy), "--out", str(work / "toy.csv"), "--trials", "3",
      "--lambda", "1", "--lambda", "5", "--iterations", "200", "--nonprivate-iterations", "2000"])
