import os
from azure.ai.textanalytics import TextAnalyticsClient
from azure.core.credentials import AzureKeyCredential


def main():
    reviews_folder = "reviews"
    cog_endpoint = os.environ["COG_SERVICE_ENDPOINT"]
    cog_key = os.environ["COG_SERVICE_KEY"]
    credential = AzureKeyCredential(cog_key)
    cog_client = TextAnalyticsClient(endpoint=cog_endpoint, credential=credential)
    # Analyze each text file in the reviews folder
    for file_name in os.listdir(reviews_folder):
        # Read the file contents
        text = open(os.path.join(reviews_folder, file_name), encoding="utf8").read()
        detectedLanguage = cog_client.detect_language(documents=[text])[0]
        print(f"{file_name}: {detectedLanguage.primary_language.name}")


if __name__ == "__main__":
    main()
