from google.cloud import language_v1


def classify_review(text):
    client = language_v1.LanguageServiceClient()
    document = language_v1.Document(content=text, type_=language_v1.Document.Type.PLAIN_TEXT)
    response = client.analyze_sentiment(request={"document": document})
    sentiment = response.document_sentiment
    if sentiment.score > 0.25:
        return "positive"
    if sentiment.score < -0.25:
        return "negative"
    return "neutral"
