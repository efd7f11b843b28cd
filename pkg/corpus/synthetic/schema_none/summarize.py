import pandas as pd


def summarize(path):
    frame = pd.read_csv(path)
    report = frame.describe()
    return report.to_dict()
