import boto3
from evidently.metric_preset import DataDriftPreset
from evidently.report import Report


def sentiment_for_batch(texts):
    comprehend = boto3.client("comprehend")
    result = comprehend.batch_detect_sentiment(TextList=list(texts), LanguageCode="en")
    return [item["Sentiment"] for item in result["ResultList"]]


def drift_report(reference_frame, current_frame):
    report = Report(metrics=[DataDriftPreset()])
    report.run(reference_data=reference_frame, current_data=current_frame)
    return report
