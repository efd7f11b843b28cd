import boto3


def sentiment_for_batch(texts):
    comprehend = boto3.client("comprehend")
    result = comprehend.batch_detect_sentiment(TextList=list(texts), LanguageCode="en")
    return [item["Sentiment"] for item in result["ResultList"]]
