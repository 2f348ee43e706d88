"""Re-vote one set of cross-validated predictions under every antenna subset
and under each antenna's individual subcarriers, to show where the spatial
diversity lives.

    python scripts/antenna_sweep.py --data /path/to/dataset
    python scripts/antenna_sweep.py --synth          # no dataset needed

Prediction collection happens once; masking is applied at vote time, so the
sweep itself is nearly free.
"""

import argparse
import itertools

from litehar.data import DatasetConfig, load_dataset
from litehar.evaluate import EvalConfig, collect_predictions, masked_accuracy
from litehar.synth import SynthSpec, generate
from litehar.voting import ChannelMask

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--data", default=None, help="dataset root (CSV recordings)")
parser.add_argument("--synth", action="store_true", help="use a synthetic stand-in")
parser.add_argument("--classes", choices=("six", "seven"), default="six")
parser.add_argument("--num-kernels", type=int, default=1000)
parser.add_argument("--folds", type=int, default=10)
parser.add_argument("--channels-per-antenna", type=int, default=30)
args = parser.parse_args()

if bool(args.data) == bool(args.synth):
    parser.error("pass exactly one of --data or --synth")

if args.synth:
    samples = generate(
        SynthSpec(classes=6, channels=90, length=2000, samples_per_class=20,
                  snr_db=10.0, seed=0)
    )
else:
    samples = load_dataset(args.data, DatasetConfig(class_set=args.classes))

config = EvalConfig(num_kernels=args.num_kernels, folds=args.folds)
pred = collect_predictions(samples, config)
m = pred.num_channels
cpa = args.channels_per_antenna
num_antennas = m // cpa

print(f"{m} channels, {num_antennas} antennas, {pred.truths.size} pooled predictions")
print(f"{'antennas':<12s} accuracy")
for r in range(num_antennas, 0, -1):
    for subset in itertools.combinations(range(1, num_antennas + 1), r):
        mask = ChannelMask.antennas(subset, num_channels=m, channels_per_antenna=cpa)
        acc = masked_accuracy(pred, mask)
        name = "+".join(str(a) for a in subset)
        print(f"{name:<12s} {acc:.4f}")

print()
print("per-antenna mean single-subcarrier accuracy:")
for a in range(num_antennas):
    accs = []
    for ch in range(a * cpa, (a + 1) * cpa):
        mask = ChannelMask(included=tuple(i == ch for i in range(m)))
        accs.append(masked_accuracy(pred, mask))
    print(f"antenna {a + 1}: {sum(accs) / len(accs):.4f} "
          f"(min {min(accs):.4f}, max {max(accs):.4f})")
