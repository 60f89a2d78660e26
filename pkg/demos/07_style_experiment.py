"""Train on Normal speech, test every style, relate errors to formant shifts.

Run: python demos/07_style_experiment.py   (about 15 s)
"""

from scipy.stats import spearmanr

from vocaltract.evaluation import ExperimentConfig, run_experiment
from vocaltract.style import generate_corpus

corpus = generate_corpus(seed=0)
for recognizer in ("dtw", "hmm"):
    report = run_experiment(corpus, ExperimentConfig(recognizer=recognizer))
    print(f"\n{recognizer.upper()}")
    print(report.table())
    styles = list(report.rates)
    disp = [report.displacement[s]["mean_displacement"] for s in styles]
    print("mean formant displacement:", " ".join(f"{s}={d:.3f}" for s, d in zip(styles, disp)))
    rho = spearmanr(disp, [report.rates[s] for s in styles]).statistic
    print(f"Spearman rho(displacement, rate) = {rho:.2f}")
