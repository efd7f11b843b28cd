import os


def word_counts(folder):
    counts = {}
    for name in os.listdir(folder):
        text = open(os.path.join(folder, name), encoding="utf8").read()
        for token in text.split():
            counts[token] = counts.get(token, 0) + 1
    return counts
