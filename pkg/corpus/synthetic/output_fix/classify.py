from google.cloud import language_v1


def classify_review(text):
    client = language_v1.LanguageServiceClient()
    document = language_v1.Document(content=text, type_=language_v1.Document.Type.PLAIN_TEXT)
    response = client.analyze_sentiment(request={"document": document})
    sentiment = response.document_sentiment
    if abs(sentiment.score) < 0.1 or sentiment.magnitude < 0.3:
        return "neutral"
    if sentiment.score > 0.25 and sentiment.magnitude > 0.5:
        return "strongly positive"
    return "mixed"
