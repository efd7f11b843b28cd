import os
from azure.ai.textanalytics import TextAnalyticsClient
from azure.core.credentials import AzureKeyCredential


def main():
    reviews_folder = "reviews"
    cog_endpoint = os.environ["COG_SERVICE_ENDPOINT"]
    cog_key = os.environ["COG_SERVICE_KEY"]
    credential = AzureKeyCredential(cog_key)
    cog_client = TextAnalyticsClient(endpoint=cog_endpoint, credential=credential)
    # Load documents directly from files for batch calls
    documents = [
        open(os.path.join(reviews_folder, file_name), encoding="utf8").read()
        for file_name in os.listdir(reviews_folder)
    ]
    # Batch process for language and sentiment detection
    detected_languages = cog_client.detect_language(documents=documents)
    print(len(detected_languages))


if __name__ == "__main__":
    main()
