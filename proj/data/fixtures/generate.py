"""Regenerates the synthetic fixture lexicons in this directory."""
import numpy as np

rng = np.random.default_rng(20261018)
SYLLABLES = ["ka", "lo", "mi", "ne", "ru", "ta", "vo", "zi", "pe", "su", "da", "gu"]


def words(n, prefix):
    out = []
    while len(out) < n:
        w = prefix + "".join(rng.choice(SYLLABLES, size=3))
        if w not in out:
            out.append(w)
    return out


def vad_from(z):
    v = 5 + 2.2 * np.tanh(z[:, 0])
    a = 5 + 1.6 * np.tanh(0.8 * z[:, 1] + 0.3 * np.abs(z[:, 0]))
    d = 5 + 1.4 * np.tanh(0.6 * z[:, 0] + 0.5 * z[:, 2])
    return np.clip(np.column_stack([v, a, d]), 1, 9)


def be5_from(vad, noise):
    v, a, d = ((vad[:, i] - 5) / 4 for i in range(3))
    joy = 1 + 4 / (1 + np.exp(-(4 * v + 0.5 * a)))
    anger = 1 + 3.5 * np.clip(-v, 0, None) * (0.5 + np.clip(a, 0, None)) + 0.4 * np.clip(d, 0, None)
    sadness = 1 + 3 * np.clip(-v, 0, None) * (1 - 0.5 * np.clip(a, 0, None))
    fear = 1 + 3 * np.clip(-v, 0, None) * np.clip(-d + 0.3, 0, None) + np.clip(a, 0, None)
    disgust = 1 + 2.5 * np.clip(-v, 0, None) + 0.3 * np.abs(a)
    out = np.column_stack([joy, anger, sadness, fear, disgust])
    out += rng.normal(0, noise, out.shape)
    return np.clip(out, 1, 5)


def write(path, header, ws, values, fmt="{:.2f}"):
    with open(path, "w", encoding="utf-8") as f:
        if header:
            f.write("\t".join(header) + "\n")
        for w, row in zip(ws, values):
            f.write(w + "\t" + "\t".join(fmt.format(x) for x in row) + "\n")


def language(prefix, n, noise):
    ws = words(n, prefix)
    z = rng.normal(size=(n, 3))
    vad = vad_from(z) + rng.normal(0, 0.25, (n, 3))
    return ws, np.clip(vad, 1, 9), be5_from(vad, noise), z


# xx: VAD on 1-9 with its own column names, BE5 on 1-5.
ws, vad, be5, z = language("x", 140, 0.15)
write("xx_vad.tsv", ["Word", "V.Mean", "A.Mean", "D.Mean"], ws[:130], vad[:130])
write("xx_be5.tsv", ["word", "joy", "anger", "sadness", "fear", "disgust"], ws[10:], be5[10:])
feat = np.column_stack([z, rng.normal(size=(140, 3))]) + rng.normal(0, 0.2, (140, 6))
write("xx_features.tsv", [], ws, feat, "{:.4f}")

# Extra xx words for lexicon builds; the first 20 overlap xx_be5.
extra_ws = ws[10:30] + words(40, "q")
extra_vad = np.vstack([vad[10:30], vad_from(rng.normal(size=(40, 3)))])
write("xx_extra_vad.tsv", ["word", "valence", "arousal", "dominance"], extra_ws, extra_vad)

# yy: VAD on a 1-7 scale, rescaled on load.
ws, vad, be5, z = language("y", 110, 0.2)
write("yy_vad.tsv", ["word", "valence", "arousal", "dominance"], ws, 1 + (vad - 1) * 6 / 8)
write("yy_be5.tsv", ["word", "joy", "anger", "sadness", "fear", "disgust"], ws[5:], be5[5:])
feat = np.column_stack([z, rng.normal(size=(110, 3))]) + rng.normal(0, 0.2, (110, 6))
write("yy_features.tsv", [], ws, feat, "{:.4f}")

with open("reliability.tsv", "w") as f:
    f.write("dataset\tvariable\treported_r\tn_participants\tsba_applied\n")
    for row in [("xx_1", "valence", 0.914, 20, "true"), ("xx_1", "arousal", 0.689, 20, "true"),
                ("xx_1", "dominance", 0.770, 20, "true"), ("xx_1", "joy", 0.95, 40, "false"),
                ("xx_1", "anger", 0.85, 40, "false"), ("yy_1", "valence", 0.90, 10, "false"),
                ("yy_1", "joy", 0.80, 30, "true")]:
        f.write("\t".join(str(x) for x in row) + "\n")
