from textblob import TextBlob


def classify_review(text):
    blob = TextBlob(text)
    polarity = blob.sentiment.polarity
    if polarity > 0.25:
        return "positive"
    return "negative"
